#pragma once

#include <vector>

#include "latred/errors.hpp"
#include "latred/rational.hpp"

namespace latred {

// Exact-rational lattice bases and the small linear-algebra kit they need.
// Matrices are row major: m[i][j] is coordinate i of basis vector j, so a
// basis is d rows by n columns with independent columns.

struct rational_basis {
    rat_mat m;

    int dim() const { return int(m.size()); }
    int rank() const { return m.empty() ? 0 : int(m[0].size()); }

    rat_vec column(int j) const {
        rat_vec c(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) c[i] = m[i][j];
        return c;
    }
};

inline rat_vec mat_vec(const rat_mat& m, const rat_vec& x) {
    rat_vec out(m.size(), rat(0));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) out[i] += m[i][j] * x[j];
    return out;
}

inline rat_vec basis_vec(const rational_basis& b, const rat_vec& coeffs) {
    return mat_vec(b.m, coeffs);
}

inline rat_vec vec_sub(const rat_vec& x, const rat_vec& y) {
    rat_vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
    return out;
}

// Gram matrix, optionally against a per-coordinate diagonal weight.
inline rat_mat gram(const rational_basis& b, const rat_vec& w = {}) {
    const int d = b.dim(), n = b.rank();
    if (!w.empty() && int(w.size()) != d)
        throw std::domain_error("weight length must match dimension");
    rat_mat g(n, rat_vec(n, rat(0)));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            rat s(0);
            for (int k = 0; k < d; ++k) {
                rat term = b.m[k][i] * b.m[k][j];
                if (!w.empty()) term *= w[k];
                s += term;
            }
            g[i][j] = s;
            g[j][i] = s;
        }
    return g;
}

// Determinant by rational Gaussian elimination.
inline rat det(rat_mat a) {
    const std::size_t n = a.size();
    rat d(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && a[piv][c] == 0) ++piv;
        if (piv == n) return rat(0);
        if (piv != c) {
            std::swap(a[piv], a[c]);
            d = -d;
        }
        d *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            if (a[r][c] == 0) continue;
            const rat f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return d;
}

// Solves a x = rhs exactly; throws on singular a.
inline rat_vec solve_linear(rat_mat a, rat_vec rhs) {
    const std::size_t n = a.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && a[piv][c] == 0) ++piv;
        if (piv == n) throw std::domain_error("singular system");
        std::swap(a[piv], a[c]);
        std::swap(rhs[piv], rhs[c]);
        const rat inv = rat(1) / a[c][c];
        for (std::size_t k = c; k < n; ++k) a[c][k] *= inv;
        rhs[c] *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0) continue;
            const rat f = a[r][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            rhs[r] -= f * rhs[c];
        }
    }
    return rhs;
}

inline void check_basis(const rational_basis& b) {
    if (b.dim() == 0 || b.rank() == 0)
        throw std::domain_error("empty basis");
    for (const auto& row : b.m)
        if (int(row.size()) != b.rank())
            throw std::domain_error("ragged basis matrix");
    if (b.rank() > b.dim())
        throw std::domain_error("rank exceeds dimension");
    if (det(gram(b)) == 0)
        throw std::domain_error("columns are linearly dependent");
}

// Exact continuous preimage: the a minimizing ||B a - v||_2, i.e. the unique
// solution when v lies in the span.
inline rat_vec continuous_coefficients(const rational_basis& b, const rat_vec& v) {
    if (int(v.size()) != b.dim())
        throw std::domain_error("vector dimension mismatch");
    rat_vec btv(b.rank(), rat(0));
    for (int j = 0; j < b.rank(); ++j)
        for (int i = 0; i < b.dim(); ++i) btv[j] += b.m[i][j] * v[i];
    return solve_linear(gram(b), btv);
}

inline bool in_span(const rational_basis& b, const rat_vec& v) {
    const rat_vec a = continuous_coefficients(b, v);
    return vec_sub(mat_vec(b.m, a), v) == rat_vec(v.size(), rat(0));
}

// Integer coefficient vector of a lattice vector; rejects anything that is
// not an exact integer combination of the columns.
inline std::vector<bigint> coefficients_of(const rational_basis& b, const rat_vec& v) {
    const rat_vec a = continuous_coefficients(b, v);
    if (vec_sub(mat_vec(b.m, a), v) != rat_vec(v.size(), rat(0)))
        throw not_lattice_vector_error("vector outside the lattice span");
    std::vector<bigint> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!is_integer(a[i]))
            throw not_lattice_vector_error("coefficients are not integral");
        out[i] = num(a[i]);
    }
    return out;
}

inline rational_basis direct_sum(const rational_basis& b1, const rational_basis& b2) {
    const int d = b1.dim() + b2.dim(), n = b1.rank() + b2.rank();
    rat_mat m(d, rat_vec(n, rat(0)));
    for (int i = 0; i < b1.dim(); ++i)
        for (int j = 0; j < b1.rank(); ++j) m[i][j] = b1.m[i][j];
    for (int i = 0; i < b2.dim(); ++i)
        for (int j = 0; j < b2.rank(); ++j)
            m[b1.dim() + i][b1.rank() + j] = b2.m[i][j];
    return {m};
}

// --------------------------------------------------------------------------
// Fixtures.

inline rational_basis zn_basis(int n) {
    rat_mat m(n, rat_vec(n, rat(0)));
    for (int i = 0; i < n; ++i) m[i][i] = rat(1);
    return {m};
}

inline rational_basis diag_basis(const std::vector<rat>& entries) {
    const int n = int(entries.size());
    rat_mat m(n, rat_vec(n, rat(0)));
    for (int i = 0; i < n; ++i) m[i][i] = entries[i];
    return {m};
}

// D_n = integer vectors with even coordinate sum; index 2 in Z^n.
inline rational_basis dn_basis(int n) {
    if (n < 2) throw std::domain_error("need n >= 2");
    rat_mat m(n, rat_vec(n, rat(0)));
    m[0][0] = rat(1);
    m[1][0] = rat(1);
    for (int j = 1; j < n; ++j) {
        m[j - 1][j] = rat(1);
        m[j][j] = rat(-1);
    }
    return {m};
}

// E8 in the even coordinate system (all-integer or all-half-integer
// coordinates with even sum); Gram is even, so lambda_1^2 = 2 exactly.
inline rational_basis e8_basis() {
    rat_mat m(8, rat_vec(8, rat(0)));
    const int upper[8][7] = {
        {2, -1, 0, 0, 0, 0, 0},  {0, 1, -1, 0, 0, 0, 0},
        {0, 0, 1, -1, 0, 0, 0},  {0, 0, 0, 1, -1, 0, 0},
        {0, 0, 0, 0, 1, -1, 0},  {0, 0, 0, 0, 0, 1, -1},
        {0, 0, 0, 0, 0, 0, 1},   {0, 0, 0, 0, 0, 0, 0},
    };
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 7; ++j) m[i][j] = rat(upper[i][j]);
        m[i][7] = rat(1, 2);
    }
    return {m};
}

// --------------------------------------------------------------------------
// Column-style Hermite normal form over the integers (test cross-check for
// sublattice constructions).  Input columns generate a full-rank lattice in
// coefficient space; output is the lower-triangular HNF basis.

inline std::vector<std::vector<bigint>> hnf_columns(std::vector<std::vector<bigint>> cols,
                                                    int n_rows) {
    // cols[k][i]: entry i of generator k; column operations only
    std::vector<std::vector<bigint>> out;
    int col = 0;
    for (int row = 0; row < n_rows; ++row) {
        // eliminate below-diagonal via extended gcd sweeps
        int piv = -1;
        for (std::size_t k = col; k < cols.size(); ++k)
            if (cols[k][row] != 0) {
                piv = int(k);
                break;
            }
        if (piv < 0) throw std::domain_error("generators not full rank");
        std::swap(cols[col], cols[piv]);
        for (std::size_t k = col + 1; k < cols.size(); ++k) {
            while (cols[k][row] != 0) {
                bigint q = cols[col][row] / cols[k][row];
                for (int i = 0; i < n_rows; ++i) cols[col][i] -= q * cols[k][i];
                std::swap(cols[col], cols[k]);
            }
        }
        if (cols[col][row] < 0)
            for (int i = 0; i < n_rows; ++i) cols[col][i] = -cols[col][i];
        // reduce earlier columns against the new pivot
        for (int k = 0; k < col; ++k) {
            bigint q;
            mpz_fdiv_q(q.get_mpz_t(), cols[k][row].get_mpz_t(),
                       cols[col][row].get_mpz_t());
            if (q != 0)
                for (int i = 0; i < n_rows; ++i) cols[k][i] -= q * cols[col][i];
        }
        ++col;
    }
    out.assign(cols.begin(), cols.begin() + col);
    return out;
}

}  // namespace latred
