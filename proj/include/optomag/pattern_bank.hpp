#pragma once

// The 27-pattern z/v/n dataset: three 3x3 ideal bitmaps, eight single-bit
// noisy variants each, split 24 train / 3 test.

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "optomag/error.hpp"

namespace optomag {

inline constexpr std::size_t kGridSide = 3;
inline constexpr std::size_t kInputs = kGridSide * kGridSide;
inline constexpr int kVariantsPerClass = 8;

using Inputs = std::array<std::uint8_t, kInputs>;
using Bitmap = std::array<std::array<std::uint8_t, kGridSide>, kGridSide>;

enum class PatternClass { Z, V, N };
enum class Role { Train, Test };

inline constexpr std::array<PatternClass, 3> kClasses{PatternClass::Z, PatternClass::V,
                                                       PatternClass::N};

inline char class_letter(PatternClass c) {
    switch (c) {
    case PatternClass::Z: return 'z';
    case PatternClass::V: return 'v';
    case PatternClass::N: return 'n';
    }
    return '?';
}

inline PatternClass parse_class(std::string_view s) {
    if (s == "z" || s == "Z") return PatternClass::Z;
    if (s == "v" || s == "V") return PatternClass::V;
    if (s == "n" || s == "N") return PatternClass::N;
    throw ConfigError("unknown pattern class '" + std::string(s) + "' (expected z, v or n)");
}

inline const char* role_name(Role r) { return r == Role::Train ? "train" : "test"; }

struct Pattern {
    Inputs inputs{};
    PatternClass cls = PatternClass::Z;
    int variant = 0; ///< 0 = ideal, k = ideal with input k+1 (1-based) flipped
    Role role = Role::Train;

    /// e.g. "z0", "v3".
    std::string id() const { return std::string(1, class_letter(cls)) + std::to_string(variant); }

    int active_count() const {
        int n = 0;
        for (auto x : inputs) n += x;
        return n;
    }

    friend bool operator==(const Pattern&, const Pattern&) = default;
};

struct Bitmaps {
    Bitmap z{};
    Bitmap v{};
    Bitmap n{};

    const Bitmap& of(PatternClass c) const {
        switch (c) {
        case PatternClass::Z: return z;
        case PatternClass::V: return v;
        case PatternClass::N: return n;
        }
        return z;
    }

    /// Stylized z, v, n letters of the memristor-perceptron benchmark.
    static Bitmaps defaults() {
        return Bitmaps{
            .z = {{{1, 1, 0}, {0, 1, 0}, {0, 1, 1}}},
            .v = {{{1, 0, 1}, {1, 0, 1}, {0, 1, 0}}},
            .n = {{{0, 1, 0}, {1, 0, 1}, {1, 0, 1}}},
        };
    }

    friend bool operator==(const Bitmaps&, const Bitmaps&) = default;
};

struct Dataset {
    std::vector<Pattern> training; ///< class-blocked: z block, v block, n block
    std::vector<Pattern> testing;  ///< one per class, variant 1
    PatternClass desired_above = PatternClass::V;
};

inline Inputs flatten(const Bitmap& grid) {
    Inputs out{};
    for (std::size_t r = 0; r < kGridSide; ++r)
        for (std::size_t c = 0; c < kGridSide; ++c) out[r * kGridSide + c] = grid[r][c];
    return out;
}

inline Bitmap unflatten(const Inputs& inputs) {
    Bitmap grid{};
    for (std::size_t i = 0; i < kInputs; ++i) grid[i / kGridSide][i % kGridSide] = inputs[i];
    return grid;
}

inline int hamming(const Inputs& a, const Inputs& b) {
    int d = 0;
    for (std::size_t i = 0; i < kInputs; ++i) d += a[i] != b[i];
    return d;
}

/// Builds a bitmap from a dynamically shaped grid, rejecting anything that is
/// not 3x3 of 0/1.
inline Bitmap bitmap_from_grid(const std::vector<std::vector<int>>& grid) {
    if (grid.size() != kGridSide) throw ConfigError("bitmap must have 3 rows");
    Bitmap out{};
    for (std::size_t r = 0; r < kGridSide; ++r) {
        if (grid[r].size() != kGridSide) throw ConfigError("bitmap row must have 3 columns");
        for (std::size_t c = 0; c < kGridSide; ++c) {
            const int v = grid[r][c];
            if (v != 0 && v != 1) throw ConfigError("bitmap entries must be 0 or 1");
            out[r][c] = static_cast<std::uint8_t>(v);
        }
    }
    return out;
}

inline std::array<Pattern, 3> ideal_patterns(const Bitmaps& bitmaps) {
    std::array<Pattern, 3> out{};
    for (std::size_t k = 0; k < kClasses.size(); ++k) {
        const auto inputs = flatten(bitmaps.of(kClasses[k]));
        for (auto x : inputs)
            if (x > 1) throw ConfigError("bitmap entries must be 0 or 1");
        out[k] = Pattern{inputs, kClasses[k], 0, Role::Train};
    }
    return out;
}

/// Variant k flips (1-based) input k+1, so the first input is never tossed.
/// Variant 1 is held out for testing.
inline std::vector<Pattern> generate_variants(const Pattern& ideal) {
    if (ideal.variant != 0) throw UsageError("generate_variants expects an ideal pattern");
    std::vector<Pattern> out;
    out.reserve(kVariantsPerClass);
    for (int k = 1; k <= kVariantsPerClass; ++k) {
        Pattern p = ideal;
        p.variant = k;
        p.inputs[static_cast<std::size_t>(k)] ^= 1U;
        p.role = k == 1 ? Role::Test : Role::Train;
        out.push_back(p);
    }
    return out;
}

inline Dataset build_dataset(const Bitmaps& bitmaps, PatternClass desired_above = PatternClass::V) {
    Dataset ds;
    ds.desired_above = desired_above;
    for (const auto& ideal : ideal_patterns(bitmaps)) {
        ds.training.push_back(ideal);
        for (const auto& v : generate_variants(ideal)) {
            if (v.role == Role::Test)
                ds.testing.push_back(v);
            else
                ds.training.push_back(v);
        }
    }
    return ds;
}

/// All 27 patterns in bar-plot order: each class's 8 training bars followed
/// by its test bar.
inline std::vector<Pattern> bar_order(const Dataset& ds) {
    std::vector<Pattern> out;
    for (auto cls : kClasses) {
        for (const auto& p : ds.training)
            if (p.cls == cls) out.push_back(p);
        for (const auto& p : ds.testing)
            if (p.cls == cls) out.push_back(p);
    }
    return out;
}

/// Parses three blocks of three lines of '0'/'1' characters (z, v, n order).
/// Blank lines separate blocks; lines starting with '#' are comments.
inline Bitmaps parse_bitmaps(std::istream& in, const std::string& source = "bitmaps") {
    std::vector<Bitmap> blocks;
    Bitmap current{};
    std::size_t row = 0;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) {
            if (row != 0) fail("incomplete bitmap block (expected 3 rows)");
            continue;
        }
        if (line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t");
        const std::string body = line.substr(first, last - first + 1);
        if (body.size() != kGridSide) fail("bitmap row must have exactly 3 characters");
        for (std::size_t c = 0; c < kGridSide; ++c) {
            if (body[c] != '0' && body[c] != '1') fail("bitmap row may only contain '0' or '1'");
            current[row][c] = static_cast<std::uint8_t>(body[c] - '0');
        }
        if (++row == kGridSide) {
            if (blocks.size() == 3) fail("more than three bitmap blocks");
            blocks.push_back(current);
            row = 0;
        }
    }
    if (row != 0) fail("incomplete bitmap block at end of input");
    if (blocks.size() != 3) fail("expected three bitmap blocks (z, v, n)");
    return Bitmaps{blocks[0], blocks[1], blocks[2]};
}

inline std::string format_bitmaps(const Bitmaps& b) {
    std::string out;
    for (auto cls : kClasses) {
        out += "# ";
        out += class_letter(cls);
        out += '\n';
        for (const auto& r : b.of(cls)) {
            for (auto x : r) out += static_cast<char>('0' + x);
            out += '\n';
        }
        out += '\n';
    }
    return out;
}

} // namespace optomag
