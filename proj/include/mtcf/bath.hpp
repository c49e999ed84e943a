// bath.hpp - bosonic environment and its correlation function alpha(t).
//
// Two representations are supported: an explicit list of modes (g_n, w_n)
// with alpha(t) = sum_n |g_n|^2 exp(-i w_n t), and a sum of exponentials
// alpha(t) = sum_k c_k exp(-w_k t) for t >= 0 extended by alpha(-t) =
// conj(alpha(t)). All memory integrals are evaluated in closed form.

#pragma once

#include <complex>
#include <variant>
#include <vector>

#include "mtcf/error.hpp"

namespace mtcf {

using cplx = std::complex<double>;

struct Mode {
    cplx g;
    double omega;

    bool operator==(const Mode&) const = default;
};

class DiscreteBath {
public:
    DiscreteBath() = default;
    explicit DiscreteBath(std::vector<Mode> modes);

    const std::vector<Mode>& modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }
    bool empty() const { return modes_.empty(); }
    double max_abs_frequency() const;

    /// Every g_n multiplied by lambda.
    DiscreteBath scaled(double lambda) const;

    bool operator==(const DiscreteBath&) const = default;

private:
    std::vector<Mode> modes_;
};

struct ExpTerm {
    cplx weight;
    cplx rate;  ///< Re(rate) >= 0

    bool operator==(const ExpTerm&) const = default;
};

class ExponentialBCF {
public:
    ExponentialBCF() = default;
    explicit ExponentialBCF(std::vector<ExpTerm> terms);

    /// alpha(t) = (gamma/2) exp(-gamma |t|).
    static ExponentialBCF decaying(double gamma);
    /// The mode sum rewritten as exponentials with purely imaginary rates.
    static ExponentialBCF from_modes(const DiscreteBath& bath);

    const std::vector<ExpTerm>& terms() const { return terms_; }
    /// Weights multiplied by lambda^2.
    ExponentialBCF scaled(double lambda) const;

    bool operator==(const ExponentialBCF&) const = default;

private:
    std::vector<ExpTerm> terms_;
};

using Bath = std::variant<DiscreteBath, ExponentialBCF>;

Bath scaled(const Bath& bath, double lambda);

/// Fourier-series discretisation of (gamma/2) exp(-gamma |t|) on [-T, T].
struct FourierBathParams {
    double gamma;
    double T;
    int nu;  ///< even; modes m = -nu/2 ... nu/2

    bool operator==(const FourierBathParams&) const = default;
};

/// C(m) = (1/2T) int_{-T}^{T} (gamma/2) e^{-gamma|t|} e^{i pi m t/T} dt, closed form.
double fourier_coefficient(const FourierBathParams& p, int m);

/// nu+1 modes with w_m = pi m / T and g_m = sqrt(C(m)), ordered m = -nu/2 ... nu/2.
DiscreteBath fourier_bath(const FourierBathParams& p);

cplx alpha_eval(const Bath& bath, double t);

/// I_{ac}^{bd} = int_a^b dtau int_c^d ds alpha(tau - s).
cplx double_integral_I(const Bath& bath, double a, double b, double c, double d);

/// int_{tau_lo}^{tau_hi} dtau alpha(s - tau) exp(-i Omega (tau - anchor)); requires s >= tau_hi.
cplx kernel_integral(const Bath& bath, double omega, double tau_lo, double tau_hi, double s, double anchor);

/// int_{t_lo}^{s} dtau alpha(s - tau) exp(-i Omega (tau - anchor)); requires s >= t_lo.
cplx memory_coefficient(const Bath& bath, double omega, double t_lo, double s, double anchor);

namespace detail {
/// (e^z - 1) / z, accurate near z = 0.
cplx phi1(cplx z);
/// (e^z - 1 - z) / z^2, accurate near z = 0.
cplx phi2(cplx z);
}  // namespace detail

}  // namespace mtcf
