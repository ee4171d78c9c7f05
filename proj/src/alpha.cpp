#include "isbm/alpha.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "isbm/error.hpp"

namespace isbm {

namespace {

void check_unit(double a, const std::string& where) {
    if (!(a >= 0.0 && a <= 1.0)) {
        std::ostringstream msg;
        msg << where << ": alpha value " << a << " outside [0, 1]";
        throw InvalidArgument(msg.str());
    }
}

}  // namespace

AlphaStep::AlphaStep(std::vector<double> starts, std::vector<double> values, double horizon)
    : starts_(std::move(starts)), values_(std::move(values)), horizon_(horizon) {
    if (starts_.empty() || starts_.size() != values_.size()) {
        throw InvalidArgument("AlphaStep: need one value per breakpoint");
    }
    if (starts_.front() != 0.0) throw InvalidArgument("AlphaStep: first breakpoint must be 0");
    for (std::size_t i = 1; i < starts_.size(); ++i) {
        if (!(starts_[i] > starts_[i - 1])) throw InvalidArgument("AlphaStep: breakpoints must increase strictly");
    }
    const bool degenerate = starts_.size() == 1 && horizon_ == 0.0;
    if (!degenerate && !(horizon_ > starts_.back())) {
        throw InvalidArgument("AlphaStep: horizon must exceed the last breakpoint");
    }
    for (double a : values_) check_unit(a, "AlphaStep");
}

AlphaStep AlphaStep::constant(double value, double horizon) { return AlphaStep({0.0}, {value}, horizon); }

std::size_t AlphaStep::interval_index(double t) const noexcept {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    if (it == starts_.begin()) return 0;
    return static_cast<std::size_t>(it - starts_.begin()) - 1;
}

double horizon_of(const AlphaSpec& spec) noexcept {
    return std::visit(
        [](const auto& a) {
            if constexpr (std::is_same_v<std::decay_t<decltype(a)>, AlphaStep>) {
                return a.horizon();
            } else {
                return a.horizon;
            }
        },
        spec);
}

namespace {

double evaluate_borel(const BorelAlpha& b, double t) {
    const double a = b.fn(t);
    check_unit(a, b.name.empty() ? "alpha function" : b.name);
    return a;
}

}  // namespace

double evaluate(const AlphaSpec& spec, double t) {
    if (const auto* step = std::get_if<AlphaStep>(&spec)) return (*step)(t);
    const auto& b = std::get<BorelAlpha>(spec);
    if (b.level == 0) return evaluate_borel(b, t);
    const double width = b.horizon / static_cast<double>(b.level);
    const double i = std::clamp(std::floor(t / width), 0.0, static_cast<double>(b.level - 1));
    return evaluate_borel(b, i * width);
}

AlphaStep discretize_alpha(const AlphaSpec& spec, std::size_t n) {
    if (n < 1) throw InvalidArgument("discretize_alpha: n must be at least 1");
    const double horizon = horizon_of(spec);
    std::vector<double> starts(n), values(n);
    for (std::size_t i = 0; i < n; ++i) {
        starts[i] = horizon * static_cast<double>(i) / static_cast<double>(n);
        if (const auto* step = std::get_if<AlphaStep>(&spec)) {
            values[i] = (*step)(starts[i]);
        } else {
            values[i] = evaluate_borel(std::get<BorelAlpha>(spec), starts[i]);
        }
    }
    return AlphaStep(std::move(starts), std::move(values), horizon);
}

AlphaStep shift_alpha(const AlphaStep& alpha, double s) {
    if (!(s >= 0.0 && s <= alpha.horizon())) throw InvalidArgument("shift_alpha: s outside [0, horizon]");
    const double horizon = alpha.horizon() - s;
    std::vector<double> starts{0.0};
    std::vector<double> values{alpha(s)};
    for (std::size_t i = alpha.interval_index(s) + 1; i < alpha.pieces(); ++i) {
        starts.push_back(alpha.starts()[i] - s);
        values.push_back(alpha.values()[i]);
    }
    return AlphaStep(std::move(starts), std::move(values), horizon);
}

namespace {

double parse_number(std::string_view s, std::string_view token) {
    std::string buf(s);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v)) {
        throw InvalidArgument("malformed alpha token \"" + std::string(token) + "\"");
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

AlphaStep from_pairs(const std::vector<std::pair<double, double>>& rows, const std::vector<std::string>& tokens,
                     double horizon) {
    if (rows.empty()) throw InvalidArgument("alpha: no pieces given");
    std::vector<double> starts, values;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto [t, a] = rows[i];
        if (i == 0 && t != 0.0) throw InvalidArgument("alpha: first breakpoint must be t=0, got \"" + tokens[i] + "\"");
        if (i > 0 && !(t > starts.back())) {
            throw InvalidArgument("alpha: breakpoints must increase strictly at \"" + tokens[i] + "\"");
        }
        if (!(t < horizon) && !(i == 0 && horizon == 0.0)) {
            throw InvalidArgument("alpha: breakpoint beyond horizon at \"" + tokens[i] + "\"");
        }
        if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("alpha value out of [0,1] in token \"" + tokens[i] + "\"");
        starts.push_back(t);
        values.push_back(a);
    }
    return AlphaStep(std::move(starts), std::move(values), horizon);
}

}  // namespace

AlphaStep parse_alpha_inline(std::string_view text, double horizon) {
    std::vector<std::pair<double, double>> rows;
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view token = trim(text.substr(pos, comma - pos));
        const std::size_t colon = token.find(':');
        if (token.empty() || colon == std::string_view::npos || token.find(':', colon + 1) != std::string_view::npos) {
            throw InvalidArgument("malformed alpha token \"" + std::string(token) + "\" (expected t:a)");
        }
        rows.emplace_back(parse_number(trim(token.substr(0, colon)), token),
                          parse_number(trim(token.substr(colon + 1)), token));
        tokens.emplace_back(token);
        pos = comma + 1;
    }
    return from_pairs(rows, tokens, horizon);
}

AlphaStep read_alpha_csv(std::istream& in, double horizon) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "t,alpha") throw InvalidArgument("alpha CSV: expected header t,alpha");
    std::vector<std::pair<double, double>> rows;
    std::vector<std::string> tokens;
    while (std::getline(in, line)) {
        const auto row = trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos) throw InvalidArgument("alpha CSV: malformed row \"" + std::string(row) + "\"");
        rows.emplace_back(parse_number(trim(row.substr(0, comma)), row), parse_number(trim(row.substr(comma + 1)), row));
        tokens.emplace_back(row);
    }
    return from_pairs(rows, tokens, horizon);
}

void write_alpha_csv(std::ostream& out, const AlphaStep& alpha) {
    out << "t,alpha\n" << std::setprecision(17);
    for (std::size_t i = 0; i < alpha.pieces(); ++i) out << alpha.starts()[i] << ',' << alpha.values()[i] << '\n';
}

std::vector<AlphaStep> read_alpha_sequence_csv(std::istream& in, double horizon) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "n,t,alpha") {
        throw InvalidArgument("alpha sequence CSV: expected header n,t,alpha");
    }
    std::vector<long> order;
    std::map<long, std::pair<std::vector<std::pair<double, double>>, std::vector<std::string>>> groups;
    while (std::getline(in, line)) {
        const auto row = trim(line);
        if (row.empty()) continue;
        const auto c1 = row.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
        if (c2 == std::string_view::npos) {
            throw InvalidArgument("alpha sequence CSV: malformed row \"" + std::string(row) + "\"");
        }
        const double n = parse_number(trim(row.substr(0, c1)), row);
        if (n != std::floor(n)) throw InvalidArgument("alpha sequence CSV: non-integer n in \"" + std::string(row) + "\"");
        const long key = static_cast<long>(n);
        if (groups.find(key) == groups.end()) {
            if (!order.empty() && key < order.back()) {
                throw InvalidArgument("alpha sequence CSV: rows must be grouped by increasing n");
            }
            order.push_back(key);
        } else if (key != order.back()) {
            throw InvalidArgument("alpha sequence CSV: rows must be grouped by increasing n");
        }
        auto& g = groups[key];
        g.first.emplace_back(parse_number(trim(row.substr(c1 + 1, c2 - c1 - 1)), row),
                             parse_number(trim(row.substr(c2 + 1)), row));
        g.second.emplace_back(row);
    }
    std::vector<AlphaStep> out;
    for (long key : order) out.push_back(from_pairs(groups[key].first, groups[key].second, horizon));
    if (out.empty()) throw InvalidArgument("alpha sequence CSV: no rows");
    return out;
}

namespace {

// Shortest representation that reads back to the same double.
std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string to_inline(const AlphaStep& alpha) {
    std::string out;
    for (std::size_t i = 0; i < alpha.pieces(); ++i) {
        if (i) out += ',';
        out += shortest(alpha.starts()[i]) + ':' + shortest(alpha.values()[i]);
    }
    return out;
}

}  // namespace isbm
