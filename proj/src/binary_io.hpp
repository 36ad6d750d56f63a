// SPDX-License-Identifier: Apache-2.0
//
// chartkit - channel charting from CSI datasets with triplet-loss networks
// Copyright (C) 2026 The chartkit contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Little-endian readers/writers shared by the binary artifact formats.

#pragma once

#include "chartkit/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

namespace chartkit::detail {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class BinaryReader {
public:
    explicit BinaryReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary)
    {
        if (!in_) throw IoError("cannot open " + path.string());
    }

    std::uint64_t offset() const noexcept { return offset_; }

    void expect_magic(std::string_view magic)
    {
        std::array<char, 4> buf{};
        if (!in_.read(buf.data(), 4) || std::string_view(buf.data(), 4) != magic)
            throw LoadError(LoadError::Kind::BadMagic, 0,
                            path_.string() + ": expected magic \"" + std::string(magic) + "\" at byte 0");
        offset_ = 4;
    }

    void expect_version(std::uint32_t version)
    {
        const auto at = offset_;
        const auto v = read<std::uint32_t>("format version");
        if (v != version)
            throw LoadError(LoadError::Kind::VersionMismatch, at,
                            path_.string() + ": unsupported version " + std::to_string(v) + " at byte " +
                                std::to_string(at));
    }

    template <class T>
    T read(const char* what)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        T value;
        read_bytes(reinterpret_cast<char*>(&value), sizeof(T), what);
        return value;
    }

    template <class T>
    void read_span(std::span<T> out, const char* what)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        read_bytes(reinterpret_cast<char*>(out.data()), out.size_bytes(), what);
    }

    /// Bytes left after the current offset.
    std::uint64_t remaining()
    {
        const auto here = in_.tellg();
        in_.seekg(0, std::ios::end);
        const auto end = in_.tellg();
        in_.seekg(here);
        return static_cast<std::uint64_t>(end - here);
    }

    [[noreturn]] void fail(LoadError::Kind kind, std::uint64_t at, const std::string& msg) const
    {
        throw LoadError(kind, at, path_.string() + ": " + msg + " at byte " + std::to_string(at));
    }

private:
    void read_bytes(char* dst, std::size_t n, const char* what)
    {
        if (!in_.read(dst, static_cast<std::streamsize>(n)))
            fail(LoadError::Kind::Truncated, offset_, std::string("truncated ") + what);
        offset_ += n;
    }

    std::filesystem::path path_;
    std::ifstream in_;
    std::uint64_t offset_ = 0;
};

class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    void magic(std::string_view m) { out_.write(m.data(), static_cast<std::streamsize>(m.size())); }

    template <class T>
    void write(const T& value)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }

    template <class T>
    void write_span(std::span<const T> values)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        out_.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
    }

private:
    std::ostream& out_;
};

/// Writes through `fill(BinaryWriter&)` into `path`, throwing IoError on failure.
template <class Fill>
void write_binary_file(const std::filesystem::path& path, Fill&& fill)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    BinaryWriter writer(out);
    fill(writer);
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace chartkit::detail
