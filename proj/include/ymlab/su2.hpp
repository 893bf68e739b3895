#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace ymlab {

// Group elements are unit quaternions q = w + x i + y j + z k, identified with
//   U = w I - i (x s1 + y s2 + z s3)
// so that quaternion products are matrix products.  Lie algebra elements are
// real 3-vectors v standing for X = -i v.s; exp(X) = cos|v| I - i sin|v| v^.s.
template <class S> using Su2 = Eigen::Quaternion<S>;
template <class S> using Alg = Eigen::Matrix<S, 3, 1>;
template <class S> using Mat2c = Eigen::Matrix<std::complex<S>, 2, 2>;

using Su2d = Su2<double>;
using Algd = Alg<double>;
using Mat2cd = Mat2c<double>;

struct BranchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class S> Su2<S> su2_identity() { return Su2<S>(S(1), S(0), S(0), S(0)); }

template <class S> Su2<S> su2_exp(const Alg<S>& v) {
    const S n = v.norm();
    if (n < S(1e-300)) return su2_identity<S>();
    const S s = std::sin(n) / n;
    return Su2<S>(std::cos(n), s * v.x(), s * v.y(), s * v.z());
}

// Principal logarithm, |v| in [0, pi).  Throws near the cut at U = -I.
template <class S> Alg<S> su2_log(const Su2<S>& q, S branch_tol = S(1e-10)) {
    const Alg<S> im = q.vec();
    const S s = im.norm();
    const S w = q.w();
    if (w + S(1) < branch_tol && s < std::sqrt(branch_tol) * S(10))
        throw BranchError("plaquette product at trace -2, principal log undefined");
    if (s < S(1e-300)) return Alg<S>::Zero();
    const S ang = std::atan2(s, w);
    return im * (ang / s);
}

template <class S> S su2_trace(const Su2<S>& q) { return S(2) * q.w(); }

template <class S> Su2<S> su2_normalized(Su2<S> q) {
    q.normalize();
    return q;
}

// Adjoint action X -> U X U^{-1} on algebra vectors.
template <class S> Alg<S> su2_ad(const Su2<S>& q, const Alg<S>& v) { return q * v; }

template <class S> Eigen::Matrix<S, 3, 3> su2_ad_matrix(const Su2<S>& q) {
    return q.toRotationMatrix();
}

// Bracket in vector coordinates: [X_a, X_b] = X_{2 a x b}.
template <class S> Alg<S> alg_bracket(const Alg<S>& a, const Alg<S>& b) {
    return S(2) * a.cross(b);
}

template <class S> Mat2c<S> su2_matrix(const Su2<S>& q) {
    using C = std::complex<S>;
    Mat2c<S> m;
    m(0, 0) = C(q.w(), -q.z());
    m(0, 1) = C(-q.y(), -q.x());
    m(1, 0) = C(q.y(), -q.x());
    m(1, 1) = C(q.w(), q.z());
    return m;
}

template <class S> Mat2c<S> alg_matrix(const Alg<S>& v) {
    using C = std::complex<S>;
    Mat2c<S> m;
    m(0, 0) = C(0, -v.z());
    m(0, 1) = C(-v.y(), -v.x());
    m(1, 0) = C(v.y(), -v.x());
    m(1, 1) = C(0, v.z());
    return m;
}

// Inverse of su2_matrix; the input is projected onto the quaternion form.
template <class S> Su2<S> su2_from_matrix(const Mat2c<S>& m) {
    const S w = (m(0, 0).real() + m(1, 1).real()) / 2;
    const S z = (m(1, 1).imag() - m(0, 0).imag()) / 2;
    const S x = -(m(0, 1).imag() + m(1, 0).imag()) / 2;
    const S y = (m(1, 0).real() - m(0, 1).real()) / 2;
    return su2_normalized(Su2<S>(w, x, y, z));
}

// exp(i theta tau), tau = diag(1,-1).
template <class S> Su2<S> su2_diag_phase(S theta) {
    return Su2<S>(std::cos(theta), S(0), S(0), -std::sin(theta));
}

// Angle theta of a diagonal element exp(i theta tau), principal branch.
template <class S> S su2_diag_angle(const Su2<S>& q) { return std::atan2(-q.z(), q.w()); }

template <class S> S su2_offdiag(const Su2<S>& q) { return std::hypot(q.x(), q.y()); }

// Spectral-norm distance |U - V|_op = |1 - e^{i t}| with t the rotation half-angle.
template <class S> S su2_distance(const Su2<S>& a, const Su2<S>& b) {
    const Su2<S> d = a * b.conjugate();
    const S w = std::clamp(d.w(), S(-1), S(1));
    return std::sqrt(S(2) * (S(1) - w));
}

}  // namespace ymlab
