#include "knotloop/numerics.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/factorials.hpp>

#include "knotloop/errors.hpp"

namespace knotloop {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kZeta2 = kPi * kPi / 6.0;

// Coefficients B_n/(n+1)! of Li2(z) = sum c_n u^(n+1), u = -log(1-z).
// Only n = 0, 1 and even n contribute.
struct BernoulliTable {
    static constexpr int kTerms = 22;
    std::array<double, kTerms> even{};  // c_{2k} for k = 1..kTerms
    BernoulliTable() {
        for (int k = 1; k <= kTerms; ++k)
            even[k - 1] = boost::math::bernoulli_b2n<double>(k) /
                          boost::math::factorial<double>(2 * k + 1);
    }
};

const BernoulliTable& bernoulli() {
    static const BernoulliTable t;
    return t;
}

cplx li2_series(cplx z) {
    cplx term = z, sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        cplx add = term / double(k * k);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        term *= z;
    }
    return sum;
}

// Valid for |z| <= 1, Re z <= 1/2, where |log(1-z)| stays well below 2 pi.
cplx li2_bernoulli(cplx z) {
    const cplx u = -std::log(1.0 - z);
    const cplx u2 = u * u;
    cplx sum = u - u2 / 4.0;
    cplx p = u2 * u;
    for (double c : bernoulli().even) {
        cplx add = c * p;
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        p *= u2;
    }
    return sum;
}

// |z| <= 1
cplx li2_disk(cplx z) {
    if (std::abs(z) <= 0.5) return li2_series(z);
    if (z.real() > 0.5) {
        cplx w = 1.0 - z;
        cplx rest = std::abs(w) <= 0.5 ? li2_series(w) : li2_bernoulli(w);
        return kZeta2 - std::log(z) * std::log(w) - rest;
    }
    return li2_bernoulli(z);
}

}  // namespace

cplx li2(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw Degenerate("li2 of a non-finite argument");
    if (z == cplx(0.0)) return 0.0;
    if (z == cplx(1.0)) return kZeta2;
    if (std::abs(z.imag()) <= 1e-13 && z.real() > 1.0 + 1e-13)
        throw BranchCut("li2 argument on the real ray (1, inf)");
    if (std::abs(z) <= 1.0) return li2_disk(z);
    cplx l = std::log(-z);
    return -kZeta2 - 0.5 * l * l - li2_disk(1.0 / z);
}

double bloch_wigner(cplx z) {
    if (z == cplx(0.0) || z == cplx(1.0))
        throw Degenerate("Bloch-Wigner function at 0 or 1");
    if (z.imag() == 0.0) return 0.0;
    if (std::abs(z) > 1.0) return -bloch_wigner(1.0 / z);
    return li2(z).imag() + std::arg(1.0 - z) * std::log(std::abs(z));
}

void require_finite(const CVec& v, const char* what) {
    if (!v.allFinite()) throw Degenerate(std::string(what) + " has non-finite entries");
}

void require_finite(const CMat& m, const char* what) {
    if (!m.allFinite()) throw Degenerate(std::string(what) + " has non-finite entries");
}

NewtonResult newton_solve(const NewtonSystem& F, const CVec& seed, const NewtonOptions& opts) {
    const Eigen::Index n = seed.size();
    CVec x = seed, fx(n), fn(n);
    CMat J(n, n), Jn(n, n);
    F(x, fx, J);
    if (!fx.allFinite() || !J.allFinite()) throw Diverged("non-finite residual at the seed");
    double r = fx.cwiseAbs().maxCoeff();
    for (int it = 0; it <= opts.max_iterations; ++it) {
        if (r < opts.tolerance) return {x, r, it};
        if (it == opts.max_iterations) break;
        Eigen::FullPivLU<CMat> lu(J);
        if (!lu.isInvertible()) throw SingularJacobian("Jacobian is singular");
        CVec step = lu.solve(-fx);
        if (!step.allFinite()) throw SingularJacobian("Newton step is not finite");
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
            CVec xn = x + t * step;
            F(xn, fn, Jn);
            if (!fn.allFinite() || !Jn.allFinite()) continue;
            double rn = fn.cwiseAbs().maxCoeff();
            if (rn < r) {
                x = xn;
                fx = fn;
                J = Jn;
                r = rn;
                accepted = true;
                break;
            }
        }
        if (!accepted) throw Diverged("no decrease after step halving");
    }
    throw Diverged("no convergence within the iteration budget");
}

cplx det_complex(const CMat& m) {
    if (m.rows() != m.cols()) throw Degenerate("determinant of a non-square matrix");
    if (m.rows() == 0) return 1.0;
    return Eigen::PartialPivLU<CMat>(m).determinant();
}

namespace {

// s a + t b = g >= 0
void ext_gcd(const BigInt& a, const BigInt& b, BigInt& g, BigInt& s, BigInt& t) {
    BigInt r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
    while (r1 != 0) {
        BigInt q = r0 / r1;
        BigInt tmp = r0 - q * r1; r0 = r1; r1 = tmp;
        tmp = s0 - q * s1; s0 = s1; s1 = tmp;
        tmp = t0 - q * t1; t0 = t1; t1 = tmp;
    }
    if (r0 < 0) { r0 = -r0; s0 = -s0; t0 = -t0; }
    g = r0; s = s0; t = t0;
}

}  // namespace

BigVec solve_integer_affine(const BigMatrix& A, const BigVec& b) {
    const size_t m = A.size();
    if (b.size() != m) throw Infeasible("shape mismatch between A and b");
    const size_t n = m ? A[0].size() : 0;
    for (const auto& row : A)
        if (row.size() != n) throw Infeasible("ragged matrix");

    BigMatrix H = A;
    BigMatrix U(n, BigVec(n, 0));
    for (size_t i = 0; i < n; ++i) U[i][i] = 1;

    auto col_combine = [&](BigMatrix& M, size_t rows, size_t k, size_t j,
                           const BigInt& a, const BigInt& bb, const BigInt& c, const BigInt& d) {
        // (col k, col j) <- (a col k + bb col j, c col k + d col j)
        for (size_t r = 0; r < rows; ++r) {
            BigInt x = M[r][k], y = M[r][j];
            M[r][k] = a * x + bb * y;
            M[r][j] = c * x + d * y;
        }
    };

    std::vector<long> pivot(m, -1);
    size_t k = 0;
    for (size_t i = 0; i < m && k < n; ++i) {
        for (size_t j = k + 1; j < n; ++j) {
            if (H[i][j] == 0) continue;
            if (H[i][k] == 0) {
                for (size_t r = 0; r < m; ++r) std::swap(H[r][k], H[r][j]);
                for (size_t r = 0; r < n; ++r) std::swap(U[r][k], U[r][j]);
                continue;
            }
            BigInt g, s, t;
            ext_gcd(H[i][k], H[i][j], g, s, t);
            BigInt c = -H[i][j] / g, d = H[i][k] / g;
            col_combine(H, m, k, j, s, t, c, d);
            col_combine(U, n, k, j, s, t, c, d);
        }
        if (H[i][k] != 0) {
            if (H[i][k] < 0) {
                for (size_t r = 0; r < m; ++r) H[r][k] = -H[r][k];
                for (size_t r = 0; r < n; ++r) U[r][k] = -U[r][k];
            }
            pivot[i] = long(k);
            ++k;
        }
    }

    BigVec y(n, 0);
    for (size_t i = 0; i < m; ++i) {
        BigInt r = b[i];
        for (size_t j = 0; j < n; ++j) r -= H[i][j] * y[j];
        if (pivot[i] < 0) {
            if (r != 0) throw Infeasible("inconsistent integer system");
            continue;
        }
        const BigInt& p = H[i][size_t(pivot[i])];
        if (r % p != 0) throw Infeasible("no integer solution");
        y[size_t(pivot[i])] = r / p;
    }
    BigVec x(n, 0);
    for (size_t r = 0; r < n; ++r)
        for (size_t j = 0; j < n; ++j) x[r] += U[r][j] * y[j];
    return x;
}

}  // namespace knotloop
