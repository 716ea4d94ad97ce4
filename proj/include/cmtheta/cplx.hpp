#pragma once

#include <cmath>
#include <ostream>
#include <string>

#include <boost/multiprecision/mpfr.hpp>

namespace cmtheta {

using Real = boost::multiprecision::mpfr_float;

// Sets the working precision of Real in bits (converted to decimal digits).
inline void set_precision_bits(unsigned bits) {
    Real::default_precision(static_cast<unsigned>(bits * 0.30103) + 2);
}

template <class T>
T real_pi() {
    if constexpr (std::is_same_v<T, double>) {
        return 3.141592653589793238462643383279502884;
    } else {
        return boost::math::constants::pi<T>();
    }
}

template <class T>
T euler_gamma() {
    if constexpr (std::is_same_v<T, double>) {
        return 0.577215664901532860606512090082402431;
    } else {
        return boost::math::constants::euler<T>();
    }
}

// Minimal complex number over an arbitrary real type; std::complex is not
// specified for non-builtin scalars and there is no MPC in the toolchain.
template <class T>
struct Cplx {
    T re{0};
    T im{0};

    Cplx() = default;
    Cplx(T r) : re(std::move(r)), im(0) {}
    Cplx(T r, T i) : re(std::move(r)), im(std::move(i)) {}
    template <class U>
        requires(!std::is_same_v<U, T> && std::is_arithmetic_v<U>)
    Cplx(U r) : re(T(r)), im(0) {}

    Cplx& operator+=(const Cplx& o) { re += o.re; im += o.im; return *this; }
    Cplx& operator-=(const Cplx& o) { re -= o.re; im -= o.im; return *this; }
    Cplx& operator*=(const Cplx& o) {
        T r = re * o.re - im * o.im;
        im = re * o.im + im * o.re;
        re = std::move(r);
        return *this;
    }
    Cplx& operator/=(const Cplx& o) {
        T n = o.re * o.re + o.im * o.im;
        T r = (re * o.re + im * o.im) / n;
        im = (im * o.re - re * o.im) / n;
        re = std::move(r);
        return *this;
    }
    friend Cplx operator+(Cplx a, const Cplx& b) { return a += b; }
    friend Cplx operator-(Cplx a, const Cplx& b) { return a -= b; }
    friend Cplx operator*(Cplx a, const Cplx& b) { return a *= b; }
    friend Cplx operator/(Cplx a, const Cplx& b) { return a /= b; }
    friend Cplx operator-(const Cplx& a) { return Cplx(-a.re, -a.im); }
    friend Cplx operator*(const T& s, const Cplx& a) { return Cplx(s * a.re, s * a.im); }
    friend Cplx operator*(const Cplx& a, const T& s) { return Cplx(s * a.re, s * a.im); }

    Cplx conj() const { return Cplx(re, -im); }
    T norm2() const { return re * re + im * im; }
    T abs() const {
        using std::sqrt;
        return sqrt(norm2());
    }
};

template <class T>
Cplx<T> cexp(const Cplx<T>& z) {
    using std::cos;
    using std::exp;
    using std::sin;
    T m = exp(z.re);
    return Cplx<T>(m * cos(z.im), m * sin(z.im));
}

// exp(i*pi*x) for real x.
template <class T>
Cplx<T> epi(const T& x) {
    using std::cos;
    using std::sin;
    T a = real_pi<T>() * x;
    return Cplx<T>(cos(a), sin(a));
}

template <class T>
Cplx<T> csqrt(const Cplx<T>& z) {
    using std::sqrt;
    T r = z.abs();
    T a = sqrt((r + z.re) / 2);
    T b = sqrt((r - z.re) / 2);
    if (z.im < 0) b = -b;
    return Cplx<T>(a, b);
}

template <class T>
std::ostream& operator<<(std::ostream& os, const Cplx<T>& z) {
    return os << z.re << (z.im < 0 ? " - " : " + ") << (z.im < 0 ? T(-z.im) : z.im) << "i";
}

template <class T>
double to_double(const T& x) {
    if constexpr (std::is_same_v<T, double>) {
        return x;
    } else {
        return x.template convert_to<double>();
    }
}

}  // namespace cmtheta
