#pragma once

#include <array>
#include <cmath>
#include <string>

#include "geometry.hpp"

namespace cmtheta {

template <class T>
struct ThetaValue {
    Cplx<T> value;
    CharQuadruple ch;
    double tail_bound = 0;
    long radius = 0;
};

struct PrecisionError : InputError {
    using InputError::InputError;
};

// Smallest eigenvalue of a real symmetric 2x2 matrix [[p, q], [q, r]].
template <class T>
T min_eigen(const T& p, const T& q, const T& r) {
    using std::sqrt;
    T m = (p + r) / 2;
    T d = sqrt((p - r) * (p - r) / 4 + q * q);
    return m - d;
}

// Radius N with sum_{|v| > N} exp(-lam |v|^2) < eps over v in a shifted Z^2.
// Points with |v| in [k, k+1) number at most 8(k + 1) + 4.
inline long gaussian_radius(double lam, double eps, double* tail = nullptr) {
    if (!(lam > 0)) throw InputError("theta sum: imaginary part is not positive definite");
    auto tail_from = [&](long N) {
        double s = 0;
        for (long k = N; k < N + 100000; ++k) {
            double t = (8.0 * (k + 1) + 4) * std::exp(-lam * double(k) * double(k));
            s += t;
            if (t < 1e-300 || t < s * 1e-20) break;
        }
        return s;
    };
    long N = 1;
    while (tail_from(N) >= eps) ++N;
    if (tail) *tail = tail_from(N);
    return N;
}

inline void require_precision(double eps) {
    double unit = std::pow(10.0, -static_cast<double>(Real::default_precision()) + 3);
    if (eps < unit) throw PrecisionError("eps " + std::to_string(eps) + " below working precision");
}

// Sum over m in Z^2 of exp(pi i (v^t tau v + v . y)), v = m + x; the
// quadratic form is evaluated from the given complex entries.
template <class T>
Cplx<T> shifted_theta_sum(const SiegelPoint<T>& tau, const std::array<T, 2>& x,
                          const std::array<T, 2>& y, long N) {
    Cplx<T> s(T(0));
    for (long m1 = -N; m1 <= N; ++m1)
        for (long m2 = -N; m2 <= N; ++m2) {
            T v1 = T(m1) + x[0], v2 = T(m2) + x[1];
            Cplx<T> ph = tau.t1 * (v1 * v1) + tau.t12 * (T(2) * v1 * v2) + tau.t2 * (v2 * v2);
            ph += Cplx<T>(v1 * y[0] + v2 * y[1]);
            // exp(pi i ph) = exp(-pi Im ph) e(Re ph / 2)
            s += cexp(Cplx<T>(-real_pi<T>() * ph.im, real_pi<T>() * ph.re));
        }
    return s;
}

// theta_{x,y}(tau) = sum_m exp(pi i (m + x/2)^t tau (m + x/2) + pi i (m + x/2) . y).
template <class T>
ThetaValue<T> siegel_theta(const CharQuadruple& ch, const SiegelPoint<T>& tau, double eps = 1e-30) {
    if (!(eps > 0)) throw InputError("siegel_theta: eps must be positive");
    if (!std::is_same_v<T, double>) require_precision(eps);
    double lam = to_double(min_eigen<T>(tau.t1.im, tau.t12.im, tau.t2.im)) * M_PI;
    ThetaValue<T> r;
    r.ch = ch;
    r.radius = gaussian_radius(lam, eps, &r.tail_bound) + 1;
    r.value = shifted_theta_sum<T>(tau, {T(ch.e[0]) / 2, T(ch.e[1]) / 2}, {T(ch.e[2]), T(ch.e[3])},
                                   r.radius);
    return r;
}

// theta^H_{x,y}(z) = sum_{u in O_F} exp(pi i tr((u + x/2)^2 z + (u + x/2) y / sqrt D)),
// summed over u = m + n e2 with embeddings computed in F directly.
template <class T>
ThetaValue<T> hilbert_theta(const HilbertChar& h, const HPoint<T>& z, long D, double eps = 1e-30) {
    if (!(eps > 0)) throw InputError("hilbert_theta: eps must be positive");
    if (!std::is_same_v<T, double>) require_precision(eps);
    QuadElem e2 = basis_e2(D);
    std::array<T, 2> e2v = {e2.embed<T>(0), e2.embed<T>(1)};
    std::array<T, 2> xv = {h.x.embed<T>(0) / 2, h.x.embed<T>(1) / 2};
    QuadElem ys = h.y / QuadElem::sqrt_of(D);
    std::array<T, 2> yv = {ys.embed<T>(0), ys.embed<T>(1)};
    // |term| = exp(-pi (y1 s1(U)^2 + y2 s2(U)^2)); in (m, n) coordinates this
    // is the form R^t diag(y) R.
    T p = z.z1.im + z.z2.im;
    T q = z.z1.im * e2v[0] + z.z2.im * e2v[1];
    T rr = z.z1.im * e2v[0] * e2v[0] + z.z2.im * e2v[1] * e2v[1];
    double lam = to_double(min_eigen<T>(p, q, rr)) * M_PI;
    ThetaValue<T> out;
    out.radius = gaussian_radius(lam, eps, &out.tail_bound) + 2;  // +2 absorbs the x/2 shift
    const long N = out.radius;
    Cplx<T> s(T(0));
    for (long m = -N; m <= N; ++m)
        for (long n = -N; n <= N; ++n) {
            Cplx<T> ph(T(0));
            for (int j = 0; j < 2; ++j) {
                T U = T(m) + T(n) * e2v[j] + xv[j];
                const Cplx<T>& zj = j == 0 ? z.z1 : z.z2;
                ph += zj * (U * U) + Cplx<T>(U * yv[j]);
            }
            s += cexp(Cplx<T>(-real_pi<T>() * ph.im, real_pi<T>() * ph.re));
        }
    out.value = s;
    out.ch = phi_char(h, D);
    return out;
}

template <class T>
struct RosenhainValues {
    std::array<Cplx<T>, 3> lambda;
    std::array<ThetaValue<T>, 6> theta;  // i1..i6
};

template <class T>
RosenhainValues<T> rosenhain_numeric(const SiegelPoint<T>& tau, double eps = 1e-30) {
    RosenhainValues<T> r;
    const auto& I = rosenhain_index_set();
    std::array<Cplx<T>, 6> sq;
    for (int j = 0; j < 6; ++j) {
        r.theta[j] = siegel_theta<T>(I[j], tau, eps);
        if (r.theta[j].value.abs() < T(1e-20))
            throw InputError("rosenhain_numeric: theta_" + I[j].str() + " vanishes (singular point)");
        sq[j] = r.theta[j].value * r.theta[j].value;
    }
    r.lambda[0] = -(sq[0] * sq[2]) / (sq[3] * sq[5]);
    r.lambda[1] = -(sq[1] * sq[2]) / (sq[4] * sq[5]);
    r.lambda[2] = -(sq[0] * sq[1]) / (sq[3] * sq[4]);
    return r;
}

// |v|^2 (4 pi e^{-gamma} det Im tau)^{2 weight}.
template <class T>
T pet_norm(const Cplx<T>& value, const SiegelPoint<T>& tau, const Rational& weight) {
    using std::exp;
    using std::pow;
    if (weight == 0) return value.norm2();
    T base = T(4) * real_pi<T>() * exp(-euler_gamma<T>()) * tau.det_im();
    return value.norm2() * pow(base, rational_to<T>(weight * 2));
}

}  // namespace cmtheta
