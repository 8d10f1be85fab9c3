#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ach/random.hpp"

namespace ach {

using Spin = std::int8_t;

// sign(x) = +1 for x >= 0, -1 otherwise.
constexpr int sign(int x) { return x >= 0 ? 1 : -1; }
// Theta(x) = 1 for x >= 0, 0 otherwise.
constexpr int step_function(int x) { return x >= 0 ? 1 : 0; }

// Validates a perceptron input size: positive and odd.
void require_odd_size(int F);

// Packed string of F spins. Bit k set means entry k is -1, clear means +1.
// Unused bits of the last word are always zero.
class WeightString {
public:
    WeightString() = default;
    // All entries +1. F must be odd and positive.
    explicit WeightString(int F);

    static WeightString from_spins(std::span<const int> spins);
    // iid uniform entries; one 64-bit draw per storage word, low bits first.
    static WeightString random(int F, Rng& rng);

    int size() const { return size_; }
    int operator[](int k) const;
    bool is_negative(int k) const { return (words_[k >> 6] >> (k & 63)) & 1U; }
    void flip(int k);

    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> mutable_words() { return words_; }
    std::vector<int> spins() const;

    WeightString operator-() const;
    int hamming(const WeightString& other) const;

    bool operator==(const WeightString&) const = default;

    static int words_for(int F) { return (F + 63) / 64; }

private:
    void clear_tail();

    int size_ = 0;
    std::vector<std::uint64_t> words_;
};

// Row-major M x F matrix of spins.
struct SpinMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Spin> data;

    std::span<const Spin> row(int r) const {
        return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
    }
};

enum class MappingKind { TeacherSeparable, RandomOutput };

std::string_view to_string(MappingKind kind);
MappingKind mapping_kind_from_string(std::string_view s);

// Training set: M input patterns with targets. Immutable once built.
class Mapping {
public:
    Mapping(SpinMatrix patterns, std::vector<Spin> targets, MappingKind kind,
            std::optional<WeightString> teacher = std::nullopt,
            std::optional<std::uint64_t> seed = std::nullopt);

    int input_size() const { return patterns_.cols; }
    int pattern_count() const { return patterns_.rows; }
    MappingKind kind() const { return kind_; }
    const std::optional<WeightString>& teacher() const { return teacher_; }
    const std::optional<std::uint64_t>& seed() const { return seed_; }

    const SpinMatrix& patterns() const { return patterns_; }
    std::span<const Spin> pattern(int l) const { return patterns_.row(l); }
    int target(int l) const { return targets_[l]; }
    std::span<const Spin> targets() const { return targets_; }

    // t^l * s_k^l for l = 0..M-1, contiguous in l.
    std::span<const std::int16_t> aligned_column(int k) const {
        const auto M = static_cast<std::size_t>(pattern_count());
        return {aligned_columns_.data() + static_cast<std::size_t>(k) * M, M};
    }
    // Pattern l packed with the WeightString bit convention.
    std::span<const std::uint64_t> packed_pattern(int l) const {
        const auto W = static_cast<std::size_t>(WeightString::words_for(input_size()));
        return {packed_patterns_.data() + static_cast<std::size_t>(l) * W, W};
    }

private:
    SpinMatrix patterns_;
    std::vector<Spin> targets_;
    MappingKind kind_;
    std::optional<WeightString> teacher_;
    std::optional<std::uint64_t> seed_;
    std::vector<std::int16_t> aligned_columns_;
    std::vector<std::uint64_t> packed_patterns_;
};

SpinMatrix generate_patterns(int F, int M, Rng& rng);

// Draws the teacher first, then the patterns row-major, from the same source.
Mapping generate_teacher_mapping(int F, int M, Rng& rng,
                                 std::optional<std::uint64_t> seed = std::nullopt);
// Draws the patterns row-major, then the M targets.
Mapping generate_random_mapping(int F, int M, Rng& rng,
                                std::optional<std::uint64_t> seed = std::nullopt);

int perceptron_output(const WeightString& w, std::span<const Spin> pattern);

// Number of misclassified patterns, evaluated term by term from the
// Theta(-t^l sum_k w_k s_k^l) definition.
int cost(const WeightString& w, const Mapping& m);

struct LocalFields {
    std::vector<int> h;
};

LocalFields compute_local_fields(const WeightString& w, const Mapping& m);
int cost_from_fields(const LocalFields& fields, const Mapping& m);

// Flips entry k of w and updates the fields. Returns the change in cost.
int apply_flip(LocalFields& fields, WeightString& w, const Mapping& m, int k);

}  // namespace ach
