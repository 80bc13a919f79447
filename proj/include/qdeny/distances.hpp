#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "qdeny/common.hpp"
#include "qdeny/state.hpp"

namespace qdeny::distances {

inline constexpr double kInputTolerance = 1e-9;

/// Probability density over byte-string labels; the sorted map fixes the
/// summation order.
class Density {
   public:
    Density() = default;
    explicit Density(std::map<std::string, double> mass, double tolerance = kInputTolerance) : mass_(std::move(mass)) {
        KahanSum total;
        for (const auto &[label, m] : mass_) {
            if (!(m >= 0.0) || !std::isfinite(m)) {
                throw DomainError("density mass must be finite and nonnegative at label '" + label + "'");
            }
            total += m;
        }
        if (std::abs(total.value() - 1.0) > tolerance) {
            throw DomainError("density masses sum to " + std::to_string(total.value()));
        }
    }

    /// Normalizes arbitrary nonnegative weights.
    static Density from_weights(const std::map<std::string, double> &weights) {
        KahanSum total;
        for (const auto &[label, w] : weights) {
            total += w;
        }
        if (!(total.value() > 0.0)) {
            throw DomainError("weights have zero total");
        }
        std::map<std::string, double> mass;
        for (const auto &[label, w] : weights) {
            mass[label] = w / total.value();
        }
        return Density(std::move(mass));
    }

    double operator()(const std::string &label) const {
        auto it = mass_.find(label);
        return it == mass_.end() ? 0.0 : it->second;
    }
    const std::map<std::string, double> &masses() const {
        return mass_;
    }
    std::size_t support_size() const {
        return mass_.size();
    }

   private:
    std::map<std::string, double> mass_;
};

namespace detail {

/// Visits the union of both label sets in sorted order.
template <class Fn>
void merge_visit(const Density &f1, const Density &f2, Fn &&fn) {
    auto a = f1.masses().begin(), ae = f1.masses().end();
    auto b = f2.masses().begin(), be = f2.masses().end();
    while (a != ae || b != be) {
        if (b == be || (a != ae && a->first < b->first)) {
            fn(a->second, 0.0);
            ++a;
        } else if (a == ae || b->first < a->first) {
            fn(0.0, b->second);
            ++b;
        } else {
            fn(a->second, b->second);
            ++a;
            ++b;
        }
    }
}

}  // namespace detail

inline double hellinger_sq(const Density &f1, const Density &f2) {
    KahanSum affinity;
    detail::merge_visit(f1, f2, [&](double p, double q) {
        if (p > 0.0 && q > 0.0) {
            affinity += std::sqrt(p * q);
        }
    });
    double h = 1.0 - affinity.value();
    return std::clamp(h, 0.0, 1.0);
}

inline double tv_distance(const Density &f1, const Density &f2) {
    KahanSum s;
    detail::merge_visit(f1, f2, [&](double p, double q) { s += std::abs(p - q); });
    return std::clamp(0.5 * s.value(), 0.0, 1.0);
}

inline double superposition_trace_bound(const Density &f1, const Density &f2) {
    double a = 1.0 - hellinger_sq(f1, f2);
    return std::sqrt(std::max(0.0, 1.0 - a * a));
}

inline double trace_distance_pure(const SparseState &psi1, const SparseState &psi2) {
    for (const SparseState *s : {&psi1, &psi2}) {
        if (std::abs(s->norm_sq() - 1.0) > kInputTolerance) {
            throw DomainError("trace_distance_pure needs normalized states");
        }
    }
    double overlap = std::norm(inner_product(psi1, psi2));
    return std::sqrt(std::clamp(1.0 - overlap, 0.0, 1.0));
}

/// Σ_label sqrt(f(label)) |index(label)⟩ over the union universe of both
/// densities, in a single register wide enough to index it.
inline std::pair<SparseState, SparseState> amplitude_encode(const Density &f1, const Density &f2) {
    std::vector<std::pair<double, double>> rows;
    detail::merge_visit(f1, f2, [&](double p, double q) { rows.emplace_back(p, q); });
    unsigned width = 1;
    while ((std::size_t{1} << width) < rows.size()) {
        width++;
    }
    RegisterLayout layout{{"L", width}};
    SparseState a(layout), b(layout);
    for (std::size_t i = 0; i < rows.size(); i++) {
        if (rows[i].first > 0) a.add(Basis{Word{i}, {}}, std::sqrt(rows[i].first));
        if (rows[i].second > 0) b.add(Basis{Word{i}, {}}, std::sqrt(rows[i].second));
    }
    return {a, b};
}

/// Measurement distribution of the given registers (database traced out).
inline Density marginal(const SparseState &s, const std::vector<std::string> &registers) {
    std::map<std::string, KahanSum> acc;
    for (const auto &[b, a] : s.entries()) {
        std::string label;
        for (const auto &r : registers) {
            if (!label.empty()) label += "|";
            label += to_hex(s.layout().get(b.regs, r), s.layout().at(r).width);
        }
        acc[label] += std::norm(a);
    }
    std::map<std::string, double> w;
    for (auto &[label, k] : acc) {
        w[label] = k.value();
    }
    return Density::from_weights(w);
}

}  // namespace qdeny::distances
