#include "wavemc/estimator.hpp"

namespace wavemc {

namespace {

constexpr std::size_t kMaxTerms = 64;
constexpr int kMaxExpandedPower = 8;

using Term = std::vector<Expr>;  // a product of factors

bool to_terms(const Expr& e, std::vector<Term>& out);

bool cross_into(const std::vector<Term>& a, const std::vector<Term>& b,
                std::vector<Term>& out) {
  if (a.size() * b.size() + out.size() > kMaxTerms) return false;
  for (const auto& ta : a)
    for (const auto& tb : b) {
      Term t = ta;
      t.insert(t.end(), tb.begin(), tb.end());
      out.push_back(std::move(t));
    }
  return true;
}

void negate_all(std::vector<Term>& terms) {
  for (auto& t : terms) t.push_back(Expr::constant(-1.0));
}

// Distributes products over sums so that e becomes a flat sum of factor
// products. z-free subtrees stay opaque single factors.
bool to_terms(const Expr& e, std::vector<Term>& out) {
  if (!e.contains_z()) {
    if (out.size() + 1 > kMaxTerms) return false;
    out.push_back({e});
    return true;
  }
  const ExprNode& n = *e.node();
  switch (n.kind) {
    case ExprKind::add:
      return to_terms(Expr(n.a), out) && to_terms(Expr(n.b), out);
    case ExprKind::sub: {
      if (!to_terms(Expr(n.a), out)) return false;
      std::vector<Term> rhs;
      if (!to_terms(Expr(n.b), rhs)) return false;
      negate_all(rhs);
      if (out.size() + rhs.size() > kMaxTerms) return false;
      out.insert(out.end(), rhs.begin(), rhs.end());
      return true;
    }
    case ExprKind::neg: {
      std::vector<Term> inner;
      if (!to_terms(Expr(n.a), inner)) return false;
      negate_all(inner);
      if (out.size() + inner.size() > kMaxTerms) return false;
      out.insert(out.end(), inner.begin(), inner.end());
      return true;
    }
    case ExprKind::mul: {
      std::vector<Term> lhs, rhs;
      if (!to_terms(Expr(n.a), lhs) || !to_terms(Expr(n.b), rhs)) return false;
      return cross_into(lhs, rhs, out);
    }
    case ExprKind::div: {
      if (Expr(n.b).contains_z()) return false;  // z in a denominator never separates
      std::vector<Term> lhs;
      if (!to_terms(Expr(n.a), lhs)) return false;
      const Expr inv = Expr::constant(1.0) / Expr(n.b);
      for (auto& t : lhs) t.push_back(inv);
      if (out.size() + lhs.size() > kMaxTerms) return false;
      out.insert(out.end(), lhs.begin(), lhs.end());
      return true;
    }
    case ExprKind::pow_int: {
      const Expr base(n.a);
      if (n.index == 0) {
        out.push_back({Expr::constant(1.0)});
        return true;
      }
      if (n.index == 1) return to_terms(base, out);
      if (n.index < 0) return false;
      if (n.kind == ExprKind::pow_int &&
          (n.a->kind == ExprKind::var_z)) {  // pure z^n stays a single factor
        out.push_back({e});
        return true;
      }
      if (n.index > kMaxExpandedPower) return false;
      std::vector<Term> base_terms;
      if (!to_terms(base, base_terms)) return false;
      std::vector<Term> acc = base_terms;
      for (int k = 1; k < n.index; ++k) {
        std::vector<Term> next;
        if (!cross_into(acc, base_terms, next)) return false;
        acc = std::move(next);
      }
      if (out.size() + acc.size() > kMaxTerms) return false;
      out.insert(out.end(), acc.begin(), acc.end());
      return true;
    }
    default:
      // var_z, exp(...), sin(...) etc.: one factor, classified below.
      if (out.size() + 1 > kMaxTerms) return false;
      out.push_back({e});
      return true;
  }
}

std::optional<SeparableTerm> classify(const Term& term) {
  std::vector<Expr> g_parts;
  int poly_total = 0;
  bool has_poly = false;
  std::optional<Expr> a_total;

  for (const Expr& factor : term) {
    if (!factor.contains_z()) {
      g_parts.push_back(factor);
      continue;
    }
    const ExprNode& n = *factor.node();
    switch (n.kind) {
      case ExprKind::var_z:
        poly_total += 1;
        has_poly = true;
        break;
      case ExprKind::pow_int:
        if (n.a->kind != ExprKind::var_z || n.index < 0) return std::nullopt;
        poly_total += n.index;
        has_poly = true;
        break;
      case ExprKind::fn_exp: {
        const Expr exponent(n.a);
        const Expr de = exponent.differentiate_z();
        if (de.contains_z()) return std::nullopt;  // exponent not affine in z
        a_total = a_total ? (*a_total + de).simplified() : de;
        // exp(E) = exp(E(z=0)) * exp(a z): the z-free part joins g.
        g_parts.push_back(exp(exponent.substitute_z(Expr::constant(0.0))));
        break;
      }
      default:
        return std::nullopt;
    }
  }

  if (has_poly && a_total) return std::nullopt;  // z^n * exp(a z): no kernel in the set
  if (poly_total > 30) return std::nullopt;      // conditional_kernel_poly would reject

  Expr g = Expr::constant(1.0);
  for (const auto& part : g_parts) g = g * part;

  SeparableTerm st;
  st.g = g.simplified();
  if (a_total) {
    st.is_exp = true;
    st.a = a_total->simplified();
  } else {
    st.poly_n = poly_total;
  }
  return st;
}

}  // namespace

std::optional<SeparableForm> detect_separable(const Expr& f) {
  std::vector<Term> terms;
  if (!to_terms(f.simplified(), terms)) return std::nullopt;
  SeparableForm form;
  form.terms.reserve(terms.size());
  for (const auto& t : terms) {
    auto st = classify(t);
    if (!st) return std::nullopt;
    form.terms.push_back(std::move(*st));
  }
  return form;
}

}  // namespace wavemc
