#include "ach/perceptron.hpp"

#include <bit>
#include <limits>
#include <stdexcept>
#include <string>

namespace ach {

namespace {

bool is_spin(int v) { return v == 1 || v == -1; }

Spin draw_spin(Rng& rng) { return (rng() >> 63) ? Spin{-1} : Spin{1}; }

}  // namespace

void require_odd_size(int F) {
    if (F < 1 || F % 2 == 0) {
        throw std::invalid_argument("input size F must be a positive odd integer, got " +
                                    std::to_string(F));
    }
    if (F > std::numeric_limits<std::int16_t>::max()) {
        throw std::invalid_argument("input size F too large: " + std::to_string(F));
    }
}

// ---------------------------------------------------------------------------
// WeightString

WeightString::WeightString(int F) : size_(F) {
    require_odd_size(F);
    words_.assign(static_cast<std::size_t>(words_for(F)), 0);
}

WeightString WeightString::from_spins(std::span<const int> spins) {
    WeightString w(static_cast<int>(spins.size()));
    for (std::size_t k = 0; k < spins.size(); ++k) {
        if (!is_spin(spins[k])) {
            throw std::invalid_argument("weight entries must be +1 or -1");
        }
        if (spins[k] < 0) w.words_[k >> 6] |= std::uint64_t{1} << (k & 63);
    }
    return w;
}

WeightString WeightString::random(int F, Rng& rng) {
    WeightString w(F);
    for (auto& word : w.words_) word = rng();
    w.clear_tail();
    return w;
}

int WeightString::operator[](int k) const {
    if (k < 0 || k >= size_) throw std::out_of_range("weight index out of range");
    return is_negative(k) ? -1 : 1;
}

void WeightString::flip(int k) {
    if (k < 0 || k >= size_) throw std::out_of_range("weight index out of range");
    words_[k >> 6] ^= std::uint64_t{1} << (k & 63);
}

std::vector<int> WeightString::spins() const {
    std::vector<int> out(static_cast<std::size_t>(size_));
    for (int k = 0; k < size_; ++k) out[k] = is_negative(k) ? -1 : 1;
    return out;
}

WeightString WeightString::operator-() const {
    WeightString out = *this;
    for (auto& word : out.words_) word = ~word;
    out.clear_tail();
    return out;
}

int WeightString::hamming(const WeightString& other) const {
    if (other.size_ != size_) throw std::invalid_argument("weight string length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) d += std::popcount(words_[i] ^ other.words_[i]);
    return d;
}

void WeightString::clear_tail() {
    const int rem = size_ & 63;
    if (rem != 0) words_.back() &= (std::uint64_t{1} << rem) - 1;
}

// ---------------------------------------------------------------------------
// Mapping

std::string_view to_string(MappingKind kind) {
    return kind == MappingKind::TeacherSeparable ? "teacher" : "random";
}

MappingKind mapping_kind_from_string(std::string_view s) {
    if (s == "teacher" || s == "teacher-separable") return MappingKind::TeacherSeparable;
    if (s == "random" || s == "random-output") return MappingKind::RandomOutput;
    throw std::invalid_argument("unknown mapping kind '" + std::string(s) + "'");
}

Mapping::Mapping(SpinMatrix patterns, std::vector<Spin> targets, MappingKind kind,
                 std::optional<WeightString> teacher, std::optional<std::uint64_t> seed)
    : patterns_(std::move(patterns)),
      targets_(std::move(targets)),
      kind_(kind),
      teacher_(std::move(teacher)),
      seed_(seed) {
    const int F = patterns_.cols;
    const int M = patterns_.rows;
    require_odd_size(F);
    if (M < 0 || patterns_.data.size() != static_cast<std::size_t>(M) * F) {
        throw std::invalid_argument("pattern matrix shape does not match its data");
    }
    if (targets_.size() != static_cast<std::size_t>(M)) {
        throw std::invalid_argument("expected one target per pattern");
    }
    for (Spin s : patterns_.data) {
        if (!is_spin(s)) throw std::invalid_argument("pattern entries must be +1 or -1");
    }
    for (Spin t : targets_) {
        if (!is_spin(t)) throw std::invalid_argument("targets must be +1 or -1");
    }
    if (kind_ == MappingKind::TeacherSeparable) {
        if (!teacher_) throw std::invalid_argument("teacher-separable mapping requires a teacher");
        if (teacher_->size() != F) throw std::invalid_argument("teacher length mismatch");
        for (int l = 0; l < M; ++l) {
            if (perceptron_output(*teacher_, pattern(l)) != targets_[l]) {
                throw std::invalid_argument("targets are not generated by the teacher");
            }
        }
    } else if (teacher_) {
        throw std::invalid_argument("random-output mapping must not carry a teacher");
    }

    aligned_columns_.resize(static_cast<std::size_t>(F) * M);
    for (int k = 0; k < F; ++k) {
        for (int l = 0; l < M; ++l) {
            aligned_columns_[static_cast<std::size_t>(k) * M + l] =
                static_cast<std::int16_t>(targets_[l] * patterns_.row(l)[k]);
        }
    }
    const int W = WeightString::words_for(F);
    packed_patterns_.assign(static_cast<std::size_t>(M) * W, 0);
    for (int l = 0; l < M; ++l) {
        auto row = patterns_.row(l);
        for (int k = 0; k < F; ++k) {
            if (row[k] < 0) {
                packed_patterns_[static_cast<std::size_t>(l) * W + (k >> 6)] |=
                    std::uint64_t{1} << (k & 63);
            }
        }
    }
}

SpinMatrix generate_patterns(int F, int M, Rng& rng) {
    require_odd_size(F);
    if (M < 0) throw std::invalid_argument("pattern count must be non-negative");
    SpinMatrix out{M, F, std::vector<Spin>(static_cast<std::size_t>(M) * F)};
    for (auto& s : out.data) s = draw_spin(rng);
    return out;
}

Mapping generate_teacher_mapping(int F, int M, Rng& rng, std::optional<std::uint64_t> seed) {
    require_odd_size(F);
    std::vector<int> teacher_spins(static_cast<std::size_t>(F));
    for (auto& s : teacher_spins) s = draw_spin(rng);
    WeightString teacher = WeightString::from_spins(teacher_spins);
    SpinMatrix patterns = generate_patterns(F, M, rng);
    std::vector<Spin> targets(static_cast<std::size_t>(M));
    for (int l = 0; l < M; ++l) {
        targets[l] = static_cast<Spin>(perceptron_output(teacher, patterns.row(l)));
    }
    return Mapping(std::move(patterns), std::move(targets), MappingKind::TeacherSeparable,
                   std::move(teacher), seed);
}

Mapping generate_random_mapping(int F, int M, Rng& rng, std::optional<std::uint64_t> seed) {
    SpinMatrix patterns = generate_patterns(F, M, rng);
    std::vector<Spin> targets(static_cast<std::size_t>(M));
    for (auto& t : targets) t = draw_spin(rng);
    return Mapping(std::move(patterns), std::move(targets), MappingKind::RandomOutput,
                   std::nullopt, seed);
}

// ---------------------------------------------------------------------------
// Output, cost and local fields

int perceptron_output(const WeightString& w, std::span<const Spin> pattern) {
    if (pattern.size() != static_cast<std::size_t>(w.size())) {
        throw std::invalid_argument("pattern length does not match weight length");
    }
    int sum = 0;
    for (int k = 0; k < w.size(); ++k) sum += (w.is_negative(k) ? -1 : 1) * pattern[k];
    return sign(sum);
}

int cost(const WeightString& w, const Mapping& m) {
    if (w.size() != m.input_size()) throw std::invalid_argument("weight length does not match mapping");
    int total = 0;
    for (int l = 0; l < m.pattern_count(); ++l) {
        auto s = m.pattern(l);
        int sum = 0;
        for (int k = 0; k < w.size(); ++k) sum += (w.is_negative(k) ? -1 : 1) * s[k];
        total += step_function(-m.target(l) * sum);
    }
    return total;
}

LocalFields compute_local_fields(const WeightString& w, const Mapping& m) {
    if (w.size() != m.input_size()) throw std::invalid_argument("weight length does not match mapping");
    LocalFields out;
    out.h.resize(static_cast<std::size_t>(m.pattern_count()));
    const auto words = w.words();
    for (int l = 0; l < m.pattern_count(); ++l) {
        const auto p = m.packed_pattern(l);
        int mismatches = 0;
        for (std::size_t i = 0; i < words.size(); ++i) mismatches += std::popcount(words[i] ^ p[i]);
        out.h[l] = w.size() - 2 * mismatches;
    }
    return out;
}

int cost_from_fields(const LocalFields& fields, const Mapping& m) {
    if (fields.h.size() != static_cast<std::size_t>(m.pattern_count())) {
        throw std::invalid_argument("field count does not match mapping");
    }
    int total = 0;
    for (int l = 0; l < m.pattern_count(); ++l) total += step_function(-m.target(l) * fields.h[l]);
    return total;
}

int apply_flip(LocalFields& fields, WeightString& w, const Mapping& m, int k) {
    if (k < 0 || k >= w.size()) throw std::out_of_range("flip index out of range");
    if (w.size() != m.input_size() || fields.h.size() != static_cast<std::size_t>(m.pattern_count())) {
        throw std::invalid_argument("fields, weights and mapping dimensions disagree");
    }
    const int old_w = w.is_negative(k) ? -1 : 1;
    int delta = 0;
    for (int l = 0; l < m.pattern_count(); ++l) {
        const int t = m.target(l);
        const int before = step_function(-t * fields.h[l]);
        fields.h[l] -= 2 * old_w * m.pattern(l)[k];
        delta += step_function(-t * fields.h[l]) - before;
    }
    w.flip(k);
    return delta;
}

}  // namespace ach
