#include "anisotope/qform.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>

#include "anisotope/common.hpp"
#include "anisotope/hilbert.hpp"
#include "anisotope/oracle.hpp"

namespace anisotope {

namespace {

Matrix identity(const GlobalField& K, int m) {
  Matrix c(m, std::vector<Elem>(m, Elem::zero(K)));
  for (int i = 0; i < m; ++i) c[i][i] = Elem::one(K);
  return c;
}

Matrix matmul(const GlobalField& K, const Matrix& x, const Matrix& y) {
  int n = static_cast<int>(x.size()), p = static_cast<int>(y[0].size());
  int inner = static_cast<int>(y.size());
  Matrix out(n, std::vector<Elem>(p, Elem::zero(K)));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < inner; ++k) {
      if (x[i][k].is_zero()) continue;
      for (int j = 0; j < p; ++j) out[i][j] = out[i][j] + x[i][k] * y[k][j];
    }
  return out;
}

Matrix transpose(const Matrix& x) {
  int n = static_cast<int>(x.size()), p = static_cast<int>(x[0].size());
  Matrix out(p, std::vector<Elem>(n, x[0][0]));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) out[j][i] = x[i][j];
  return out;
}

}  // namespace

QuadForm::QuadForm(const GlobalField& K, const Matrix& entries) : field_(K) {
  int m = static_cast<int>(entries.size());
  if (m < 1) throw std::domain_error("QuadForm: dimension must be at least 1");
  for (const auto& row : entries)
    if (static_cast<int>(row.size()) != m)
      throw std::domain_error("QuadForm: matrix must be square");
  Elem half = Elem(K, 2).inverse();
  a_.assign(m, std::vector<Elem>(m, Elem::zero(K)));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      a_[i][j] = (entries[i][j] + entries[j][i]) * half;
}

QuadForm QuadForm::diagonal(const GlobalField& K, const std::vector<Elem>& coeffs) {
  int m = static_cast<int>(coeffs.size());
  if (m < 1) throw std::domain_error("QuadForm: dimension must be at least 1");
  Matrix a(m, std::vector<Elem>(m, Elem::zero(K)));
  for (int i = 0; i < m; ++i) a[i][i] = coeffs[i];
  return QuadForm(K, a);
}

Elem QuadForm::evaluate(const std::vector<Elem>& x) const {
  if (static_cast<int>(x.size()) != dim())
    throw std::domain_error("QuadForm::evaluate: wrong vector length");
  Elem acc = Elem::zero(field_);
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) acc = acc + a_[i][j] * x[i] * x[j];
  return acc;
}

bool QuadForm::is_zero_form() const {
  for (const auto& row : a_)
    for (const Elem& e : row)
      if (!e.is_zero()) return false;
  return true;
}

DiagForm diagonalize(const QuadForm& f) {
  const GlobalField& K = f.field();
  int m = f.dim();
  Matrix a = f.matrix();
  Matrix c = identity(K, m);

  auto swap_basis = [&](int k, int l) {
    for (int i = 0; i < m; ++i) std::swap(a[i][k], a[i][l]);
    for (int j = 0; j < m; ++j) std::swap(a[k][j], a[l][j]);
    for (int i = 0; i < m; ++i) std::swap(c[i][k], c[i][l]);
  };
  // basis_l -= coef * basis_k
  auto eliminate = [&](int k, int l, const Elem& coef) {
    for (int i = 0; i < m; ++i) a[i][l] = a[i][l] - coef * a[i][k];
    for (int j = 0; j < m; ++j) a[l][j] = a[l][j] - coef * a[k][j];
    for (int i = 0; i < m; ++i) c[i][l] = c[i][l] - coef * c[i][k];
  };
  // (basis_k, basis_l) -> (basis_k + basis_l, basis_k - basis_l)
  auto hyperbolic = [&](int k, int l) {
    for (int i = 0; i < m; ++i) {
      Elem u = a[i][k], v = a[i][l];
      a[i][k] = u + v;
      a[i][l] = u - v;
    }
    for (int j = 0; j < m; ++j) {
      Elem u = a[k][j], v = a[l][j];
      a[k][j] = u + v;
      a[l][j] = u - v;
    }
    for (int i = 0; i < m; ++i) {
      Elem u = c[i][k], v = c[i][l];
      c[i][k] = u + v;
      c[i][l] = u - v;
    }
  };

  for (int k = 0; k < m; ++k) {
    if (a[k][k].is_zero()) {
      int diag_l = -1, off_l = -1;
      for (int l = k + 1; l < m && diag_l < 0; ++l)
        if (!a[l][l].is_zero()) diag_l = l;
      if (diag_l >= 0) {
        swap_basis(k, diag_l);
      } else {
        for (int l = k + 1; l < m && off_l < 0; ++l)
          if (!a[k][l].is_zero()) off_l = l;
        if (off_l < 0) continue;  // radical direction
        hyperbolic(k, off_l);
      }
    }
    for (int l = k + 1; l < m; ++l) {
      if (a[k][l].is_zero()) continue;
      eliminate(k, l, a[k][l] / a[k][k]);
    }
  }

  // Move zero diagonal entries behind the nonzero ones (a column permutation
  // is a congruence).
  std::vector<int> order;
  for (int k = 0; k < m; ++k)
    if (!a[k][k].is_zero()) order.push_back(k);
  int n = static_cast<int>(order.size());
  for (int k = 0; k < m; ++k)
    if (a[k][k].is_zero()) order.push_back(k);

  DiagForm out;
  out.field = K;
  out.ambient = m;
  out.c.assign(m, std::vector<Elem>(m, Elem::zero(K)));
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) out.c[i][j] = c[i][order[j]];
  for (int j = 0; j < n; ++j) out.coeffs.push_back(a[order[j]][order[j]]);

  // The reduction is self-checking: C^t A C must equal diag(coeffs, 0..0).
  Matrix check = matmul(K, transpose(out.c), matmul(K, f.matrix(), out.c));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Elem want = (i == j && i < n) ? out.coeffs[i] : Elem::zero(K);
      if (check[i][j] != want)
        throw internal_error("diagonalize: congruence identity failed");
    }
  return out;
}

bool local_isotropic(const DiagForm& d, const Place& v) {
  int n = d.rank();
  if (n == 0) throw std::domain_error("local_isotropic: empty form");
  for (const Elem& b : d.coeffs)
    if (b.is_zero())
      throw std::domain_error("local_isotropic: degenerate form (zero coefficient)");

  if (v.kind() == Place::Kind::RealInf) {
    bool pos = false, neg = false;
    for (const Elem& b : d.coeffs) (b.sign() > 0 ? pos : neg) = true;
    return pos && neg;
  }
  switch (n) {
    case 1:
      return false;
    case 2:
      return is_square(-(d.coeffs[0] * d.coeffs[1]), v);
    case 3:
      return hilbert_symbol(-(d.coeffs[0] * d.coeffs[1]),
                            -(d.coeffs[0] * d.coeffs[2]), v) == 1;
    case 4: {
      Elem disc = d.coeffs[0] * d.coeffs[1] * d.coeffs[2] * d.coeffs[3];
      bool anis = is_square(disc, v) &&
                  hilbert_symbol(d.coeffs[0], d.coeffs[1], v) ==
                      -hilbert_symbol(-d.coeffs[2], -d.coeffs[3], v);
      return !anis;
    }
    default:
      return true;  // n >= 5 at a nonarchimedean place
  }
}

std::vector<Place> critical_places(const GlobalField& K, const std::vector<Elem>& coeffs) {
  std::set<Place> finite;
  for (const Elem& b : coeffs)
    if (!b.is_zero())
      for (const Place& v : support(b)) finite.insert(v);
  std::vector<Place> out;
  if (K.is_q()) {
    out.push_back(Place::real_inf());
    finite.insert(Place::finite_prime(2));
    Place two = Place::finite_prime(2);
    for (const Place& v : finite)
      if (v != two) out.push_back(v);
    out.push_back(two);  // the dyadic analysis goes last
  } else {
    out.push_back(Place::degree_inf(K.q));
    for (const Place& v : finite) out.push_back(v);
  }
  return out;
}

namespace {

std::string obstruction_kind(int n, const Place& v) {
  if (v.kind() == Place::Kind::RealInf) return "definite";
  switch (n) {
    case 1: return "rank-one";
    case 2: return "nonsquare";
    case 3: return "symbol";
    case 4: return "class-pair";
    default:
      throw internal_error("decide: no finite obstruction exists for rank >= 5");
  }
}

std::vector<Elem> apply_matrix(const GlobalField& K, const Matrix& c,
                               const std::vector<Elem>& y) {
  int m = static_cast<int>(c.size());
  std::vector<Elem> x(m, Elem::zero(K));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) x[i] = x[i] + c[i][j] * y[j];
  return x;
}

}  // namespace

Decision decide(const QuadForm& f) {
  const GlobalField& K = f.field();
  int m = f.dim();

  if (f.is_zero_form()) {
    // The zero form represents 0 by convention; any nonzero vector works.
    IsotropyCertificate cert;
    cert.kind = IsotropyCertificate::Kind::Isotropic;
    cert.witness.assign(m, Elem::zero(K));
    cert.witness[0] = Elem::one(K);
    return {Verdict::Isotropic, std::move(cert)};
  }

  DiagForm d = diagonalize(f);
  if (d.rank() < m) {
    IsotropyCertificate cert;
    cert.kind = IsotropyCertificate::Kind::DegenerateIsotropic;
    std::vector<Elem> y(m, Elem::zero(K));
    y[d.rank()] = Elem::one(K);
    cert.witness = apply_matrix(K, d.c, y);
    for (const auto& row : f.matrix()) {
      Elem acc = Elem::zero(K);
      for (int j = 0; j < m; ++j) acc = acc + row[j] * cert.witness[j];
      if (!acc.is_zero()) throw internal_error("decide: kernel vector is not in the radical");
    }
    return {Verdict::Isotropic, std::move(cert)};
  }

  for (const Place& v : critical_places(K, d.coeffs)) {
    if (local_isotropic(d, v)) continue;
    IsotropyCertificate cert;
    cert.kind = IsotropyCertificate::Kind::Anisotropic;
    cert.place = v;
    cert.diag = d.coeffs;
    cert.congruence = d.c;
    cert.obstruction = obstruction_kind(d.rank(), v);
    return {Verdict::Anisotropic, std::move(cert)};
  }

  // Locally isotropic everywhere; look for an explicit witness, but the
  // verdict stands even if the bounded search comes back empty.
  IsotropyCertificate cert;
  cert.kind = IsotropyCertificate::Kind::Isotropic;
  const std::vector<long> ladder =
      K.is_q() ? std::vector<long>{1000, 10000, 100000} : std::vector<long>{2, 3, 4};
  for (long height : ladder) {
    std::optional<std::vector<Elem>> y;
    try {
      y = global_witness_search(d.coeffs, height);
    } catch (const search_exhausted&) {
      break;
    }
    if (!y) continue;
    cert.witness = apply_matrix(K, d.c, *y);
    bool nonzero = false;
    for (const Elem& e : cert.witness) nonzero = nonzero || !e.is_zero();
    if (!nonzero || !f.evaluate(cert.witness).is_zero())
      throw internal_error("decide: transformed witness fails to vanish");
    break;
  }
  return {Verdict::Isotropic, std::move(cert)};
}

Decision decide(const GlobalField& K, const std::vector<Elem>& diag_coeffs) {
  return decide(QuadForm::diagonal(K, diag_coeffs));
}

namespace {

bool fail(std::string* reason, const char* why) {
  if (reason) *reason = why;
  return false;
}

}  // namespace

bool check_certificate(const QuadForm& f, const IsotropyCertificate& cert,
                       std::string* reason) {
  const GlobalField& K = f.field();
  int m = f.dim();

  switch (cert.kind) {
    case IsotropyCertificate::Kind::Isotropic: {
      if (static_cast<int>(cert.witness.size()) != m)
        return fail(reason, "witness length differs from the form dimension");
      bool nonzero = false;
      for (const Elem& e : cert.witness) nonzero = nonzero || !e.is_zero();
      if (!nonzero) return fail(reason, "witness is the zero vector");
      if (!f.evaluate(cert.witness).is_zero())
        return fail(reason, "form does not vanish on the witness");
      return true;
    }

    case IsotropyCertificate::Kind::DegenerateIsotropic: {
      if (static_cast<int>(cert.witness.size()) != m)
        return fail(reason, "kernel vector length differs from the form dimension");
      bool nonzero = false;
      for (const Elem& e : cert.witness) nonzero = nonzero || !e.is_zero();
      if (!nonzero) return fail(reason, "kernel vector is zero");
      for (const auto& row : f.matrix()) {
        Elem acc = Elem::zero(K);
        for (int j = 0; j < m; ++j) acc = acc + row[j] * cert.witness[j];
        if (!acc.is_zero()) return fail(reason, "vector is not in the kernel of A");
      }
      return true;
    }

    case IsotropyCertificate::Kind::Anisotropic: {
      if (!cert.place) return fail(reason, "no obstructed place recorded");
      const Place& w = *cert.place;
      if (w.field().tag() != K.tag()) return fail(reason, "place of the wrong field");
      int n = static_cast<int>(cert.diag.size());
      if (n != m) return fail(reason, "anisotropic certificate must cover the full rank");
      for (const Elem& b : cert.diag)
        if (b.is_zero()) return fail(reason, "zero diagonal coefficient");
      if (static_cast<int>(cert.congruence.size()) != m)
        return fail(reason, "congruence matrix has the wrong shape");
      for (const auto& row : cert.congruence)
        if (static_cast<int>(row.size()) != m)
          return fail(reason, "congruence matrix has the wrong shape");
      Matrix got = matmul(K, transpose(cert.congruence),
                          matmul(K, f.matrix(), cert.congruence));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          Elem want = (i == j) ? cert.diag[i] : Elem::zero(K);
          if (got[i][j] != want)
            return fail(reason, "congruence matrix does not diagonalize the form");
        }

      const std::vector<Elem>& b = cert.diag;
      if (cert.obstruction == "definite") {
        if (w.kind() != Place::Kind::RealInf)
          return fail(reason, "definite obstruction only makes sense at the real place");
        int s = b[0].sign();
        for (const Elem& e : b)
          if (e.sign() != s) return fail(reason, "signs are mixed at the real place");
        return true;
      }
      if (cert.obstruction == "rank-one")
        return n == 1 ? true : fail(reason, "rank-one obstruction needs a rank-1 form");
      if (cert.obstruction == "nonsquare") {
        if (n != 2) return fail(reason, "nonsquare obstruction needs a rank-2 form");
        if (is_square(-(b[0] * b[1]), w))
          return fail(reason, "-b1*b2 is a square at the claimed place");
        return true;
      }
      if (cert.obstruction == "symbol") {
        if (n != 3) return fail(reason, "symbol obstruction needs a rank-3 form");
        if (hilbert_symbol(-(b[0] * b[1]), -(b[0] * b[2]), w) != -1)
          return fail(reason, "Hilbert symbol does not obstruct at the claimed place");
        return true;
      }
      if (cert.obstruction == "class-pair") {
        if (n != 4) return fail(reason, "class-pair obstruction needs a rank-4 form");
        if (!is_square(b[0] * b[1] * b[2] * b[3], w))
          return fail(reason, "discriminant is not a square at the claimed place");
        if (hilbert_symbol(b[0], b[1], w) != -hilbert_symbol(-b[2], -b[3], w))
          return fail(reason, "symbols do not exhibit the rank-4 obstruction");
        return true;
      }
      return fail(reason, "unknown obstruction kind");
    }
  }
  return fail(reason, "unknown certificate kind");
}

}  // namespace anisotope
