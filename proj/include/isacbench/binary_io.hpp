// SPDX-License-Identifier: Apache-2.0
//
// isacbench: OFDM ISAC radar simulation and peak-detection benchmark
// Copyright (C) 2026 The isacbench authors
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


#pragma once

#include "common.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string_view>

// Little-endian primitives for the binary CSI / periodogram containers.
namespace isac::io {

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc)
    {
        require(out_.good(), "cannot open '" + path.string() + "' for writing");
    }

    void magic(std::string_view m) { out_.write(m.data(), static_cast<std::streamsize>(m.size())); }
    void u32(std::uint32_t v) { put(v); }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }

    void finish()
    {
        out_.flush();
        require(out_.good(), "write to '" + path_.string() + "' failed");
    }

private:
    template <typename U>
    void put(U v)
    {
        unsigned char buf[sizeof(U)];
        for (std::size_t i = 0; i < sizeof(U); ++i)
            buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
        out_.write(reinterpret_cast<const char*>(buf), sizeof(U));
    }

    std::filesystem::path path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary)
    {
        require(in_.good(), "cannot open '" + path.string() + "' for reading");
    }

    void expect_magic(std::string_view m)
    {
        std::string got(m.size(), '\0');
        in_.read(got.data(), static_cast<std::streamsize>(got.size()));
        require(in_.good() && got == m, "'" + path_.string() + "' is not a " + std::string(m) + " file");
    }

    std::uint32_t u32() { return get<std::uint32_t>(); }
    float f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

    void expect_end()
    {
        in_.peek();
        require(in_.eof(), "'" + path_.string() + "' has trailing bytes");
    }

private:
    template <typename U>
    U get()
    {
        unsigned char buf[sizeof(U)];
        in_.read(reinterpret_cast<char*>(buf), sizeof(U));
        require(in_.gcount() == static_cast<std::streamsize>(sizeof(U)), "'" + path_.string() + "' is truncated");
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<U>(buf[i]) << (8 * i);
        return v;
    }

    std::filesystem::path path_;
    std::ifstream in_;
};

} // namespace isac::io
