#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace isbm {

/// Right-continuous step function on [0, horizon]: value alpha_i on [t_i, t_{i+1}).
/// Adjacent equal values are kept, so piece indices always match the partition.
class AlphaStep {
public:
    AlphaStep(std::vector<double> starts, std::vector<double> values, double horizon);

    static AlphaStep constant(double value, double horizon);

    /// alpha(t); t >= horizon evaluates the last piece, t < 0 the first.
    double operator()(double t) const noexcept { return values_[interval_index(t)]; }

    /// Index i with t in [t_i, t_{i+1}).
    std::size_t interval_index(double t) const noexcept;

    std::size_t pieces() const noexcept { return values_.size(); }
    const std::vector<double>& starts() const noexcept { return starts_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double horizon() const noexcept { return horizon_; }

    /// Interior breakpoints t_1..t_{m-1}.
    std::vector<double> breakpoints() const { return {starts_.begin() + 1, starts_.end()}; }

    friend bool operator==(const AlphaStep&, const AlphaStep&) = default;

private:
    std::vector<double> starts_;
    std::vector<double> values_;
    double horizon_;
};

/// Pointwise-evaluable alpha with an optional discretization level.
/// level == 0 means signs use the exact value alpha(g) at each excursion start.
struct BorelAlpha {
    std::function<double(double)> fn;
    double horizon = 1.0;
    std::size_t level = 0;
    std::string name;
};

using AlphaSpec = std::variant<AlphaStep, BorelAlpha>;

double horizon_of(const AlphaSpec& spec) noexcept;

/// alpha(t) under the spec; a BorelAlpha with level n > 0 is evaluated through
/// its n-piece discretization. Throws InvalidArgument outside [0, 1].
double evaluate(const AlphaSpec& spec, double t);

/// Uniform partition t_i = i * horizon / n with alpha_i = spec(t_i).
AlphaStep discretize_alpha(const AlphaSpec& spec, std::size_t n);

/// u -> alpha(s + u) on [0, horizon - s].
AlphaStep shift_alpha(const AlphaStep& alpha, double s);

/// Inline grammar `t0:a0,t1:a1,...` with t0 = 0, strictly increasing t, a in [0,1].
/// Errors name the offending token.
AlphaStep parse_alpha_inline(std::string_view text, double horizon);

/// CSV with header `t,alpha`, rows sorted by t, first row t = 0.
AlphaStep read_alpha_csv(std::istream& in, double horizon);
void write_alpha_csv(std::ostream& out, const AlphaStep& alpha);

/// Sequence file for stability runs: header `n,t,alpha`, rows grouped by n.
std::vector<AlphaStep> read_alpha_sequence_csv(std::istream& in, double horizon);

/// `0:a0,t1:a1,...` rendering used when echoing configs.
std::string to_inline(const AlphaStep& alpha);

}  // namespace isbm
