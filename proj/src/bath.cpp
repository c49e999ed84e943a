#include "mtcf/bath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mtcf {

namespace detail {

cplx phi1(cplx z) {
    if (std::abs(z) < 0.1) {
        // Horner form of sum_{k>=0} z^k / (k+1)!
        cplx acc = 1.0 / 39916800.0;  // 1/11!
        double fact = 39916800.0;
        for (int k = 10; k >= 1; --k) {
            fact /= (k + 1);
            acc = acc * z + 1.0 / fact;
        }
        return acc;
    }
    return (std::exp(z) - 1.0) / z;
}

cplx phi2(cplx z) {
    if (std::abs(z) < 0.1) {
        // sum_{k>=0} z^k / (k+2)!
        cplx acc = 0.0;
        double fact = 1.0;
        for (int k = 2; k <= 13; ++k) fact *= k;  // 13!
        for (int k = 11; k >= 0; --k) {
            acc = acc * z + 1.0 / fact;
            fact /= (k + 2);
        }
        return acc;
    }
    return (std::exp(z) - 1.0 - z) / (z * z);
}

}  // namespace detail

namespace {

constexpr cplx kIm{0.0, 1.0};

using detail::phi1;
using detail::phi2;

// int_0^x e^{-w u} du
cplx e1(cplx w, double x) { return x * phi1(-w * x); }
// int_0^x int_0^u e^{-w v} dv du
cplx e2(cplx w, double x) { return x * x * phi2(-w * x); }

// int_a^b dtau int_c^d ds e^{-w (tau - s)} [tau >= s], with a <= b and c <= d.
cplx ordered_block(cplx w, double a, double b, double c, double d) {
    cplx total = 0.0;
    // c <= tau <= d: inner s runs over [c, tau]
    double p = std::max(a, c), q = std::min(b, d);
    if (q > p) total += e2(w, q - c) - e2(w, p - c);
    // tau > d: inner s runs over all of [c, d]
    p = std::max(a, d);
    q = b;
    if (q > p) total += std::exp(-w * (p - d)) * e1(w, q - p) * e1(w, d - c);
    return total;
}

cplx double_integral_exp(const ExponentialBCF& bcf, double a, double b, double c, double d) {
    cplx total = 0.0;
    for (const auto& term : bcf.terms()) {
        total += term.weight * ordered_block(term.rate, a, b, c, d);
        total += std::conj(term.weight) * ordered_block(std::conj(term.rate), c, d, a, b);
    }
    return total;
}

// int_{u0}^{u1} e^{-k u} du
cplx exp_segment(cplx k, double u0, double u1) { return std::exp(-k * u0) * (u1 - u0) * phi1(-k * (u1 - u0)); }

}  // namespace

DiscreteBath::DiscreteBath(std::vector<Mode> modes) : modes_(std::move(modes)) {
    for (const auto& m : modes_) {
        if (!std::isfinite(m.omega) || !std::isfinite(m.g.real()) || !std::isfinite(m.g.imag())) {
            throw InvalidArgument("bath mode has non-finite coupling or frequency");
        }
    }
}

double DiscreteBath::max_abs_frequency() const {
    double w = 0.0;
    for (const auto& m : modes_) w = std::max(w, std::abs(m.omega));
    return w;
}

DiscreteBath DiscreteBath::scaled(double lambda) const {
    std::vector<Mode> out = modes_;
    for (auto& m : out) m.g *= lambda;
    return DiscreteBath(std::move(out));
}

ExponentialBCF::ExponentialBCF(std::vector<ExpTerm> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_) {
        if (!(t.rate.real() >= 0.0)) throw InvalidArgument("exponential BCF rate must have Re(w) >= 0");
        if (!std::isfinite(std::abs(t.weight)) || !std::isfinite(std::abs(t.rate))) {
            throw InvalidArgument("exponential BCF term is not finite");
        }
    }
}

ExponentialBCF ExponentialBCF::decaying(double gamma) {
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    return ExponentialBCF({{cplx(0.5 * gamma), cplx(gamma)}});
}

ExponentialBCF ExponentialBCF::from_modes(const DiscreteBath& bath) {
    std::vector<ExpTerm> terms;
    terms.reserve(bath.size());
    for (const auto& m : bath.modes()) terms.push_back({std::norm(m.g), cplx(0.0, m.omega)});
    return ExponentialBCF(std::move(terms));
}

ExponentialBCF ExponentialBCF::scaled(double lambda) const {
    std::vector<ExpTerm> out = terms_;
    for (auto& t : out) t.weight *= lambda * lambda;
    return ExponentialBCF(std::move(out));
}

Bath scaled(const Bath& bath, double lambda) {
    return std::visit([lambda](const auto& b) -> Bath { return b.scaled(lambda); }, bath);
}

double fourier_coefficient(const FourierBathParams& p, int m) {
    const double k = std::numbers::pi * m / p.T;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return (p.gamma / (2.0 * p.T)) * p.gamma * (1.0 - sign * std::exp(-p.gamma * p.T)) /
           (p.gamma * p.gamma + k * k);
}

DiscreteBath fourier_bath(const FourierBathParams& p) {
    if (!(p.gamma > 0.0)) throw InvalidArgument("fourier bath: gamma must be positive");
    if (!(p.T > 0.0)) throw InvalidArgument("fourier bath: T must be positive");
    if (p.nu <= 0 || p.nu % 2 != 0) throw InvalidArgument("fourier bath: nu must be a positive even integer");
    std::vector<Mode> modes;
    for (int m = -p.nu / 2; m <= p.nu / 2; ++m) {
        const double cm = fourier_coefficient(p, m);
        if (cm < 0.0) throw InvalidArgument("fourier bath: negative coefficient C(" + std::to_string(m) + ")");
        modes.push_back({cplx(std::sqrt(cm)), std::numbers::pi * m / p.T});
    }
    return DiscreteBath(std::move(modes));
}

cplx alpha_eval(const Bath& bath, double t) {
    if (const auto* d = std::get_if<DiscreteBath>(&bath)) {
        cplx sum = 0.0;
        for (const auto& m : d->modes()) sum += std::norm(m.g) * std::exp(-kIm * (m.omega * t));
        return sum;
    }
    const auto& e = std::get<ExponentialBCF>(bath);
    const double u = std::abs(t);
    cplx sum = 0.0;
    for (const auto& term : e.terms()) sum += term.weight * std::exp(-term.rate * u);
    return t >= 0.0 ? sum : std::conj(sum);
}

cplx double_integral_I(const Bath& bath, double a, double b, double c, double d) {
    if (const auto* disc = std::get_if<DiscreteBath>(&bath)) {
        cplx sum = 0.0;
        for (const auto& m : disc->modes()) {
            const cplx iw(0.0, m.omega);
            // int_a^b e^{-i w tau} dtau and int_c^d e^{i w s} ds
            const cplx f = std::exp(-iw * a) * (b - a) * phi1(-iw * (b - a));
            const cplx g = std::exp(iw * c) * (d - c) * phi1(iw * (d - c));
            sum += std::norm(m.g) * f * g;
        }
        return sum;
    }
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -sign;
    }
    if (d < c) {
        std::swap(c, d);
        sign = -sign;
    }
    return sign * double_integral_exp(std::get<ExponentialBCF>(bath), a, b, c, d);
}

cplx kernel_integral(const Bath& bath, double omega, double tau_lo, double tau_hi, double s, double anchor) {
    if (s < tau_hi - 1e-12 * std::max(1.0, std::abs(s))) {
        throw InvalidArgument("kernel_integral: alpha argument would be negative (s < tau_hi)");
    }
    const double u0 = std::max(0.0, s - tau_hi);
    const double u1 = s - tau_lo;
    const cplx phase = std::exp(-kIm * (omega * (s - anchor)));
    cplx sum = 0.0;
    if (const auto* d = std::get_if<DiscreteBath>(&bath)) {
        for (const auto& m : d->modes()) sum += std::norm(m.g) * exp_segment(cplx(0.0, m.omega - omega), u0, u1);
    } else {
        for (const auto& term : std::get<ExponentialBCF>(bath).terms()) {
            sum += term.weight * exp_segment(term.rate - cplx(0.0, omega), u0, u1);
        }
    }
    return phase * sum;
}

cplx memory_coefficient(const Bath& bath, double omega, double t_lo, double s, double anchor) {
    if (s < t_lo) throw InvalidArgument("memory_coefficient: requires s >= t_lo");
    return kernel_integral(bath, omega, t_lo, s, s, anchor);
}

}  // namespace mtcf
