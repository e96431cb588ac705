#include "graddiv/elements.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace graddiv {

std::string_view family_name(ElementFamily f) {
  switch (f) {
    case ElementFamily::P1: return "P1";
    case ElementFamily::P2: return "P2";
    case ElementFamily::P1Bubble: return "P1Bubble";
  }
  return "?";
}

BasisValues<double> eval_basis(ElementFamily family, const Barycentric& l) {
  if ((l.array() < 0.0).any() || std::abs(l.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("eval_basis: point is not barycentric");
  return eval_basis_unchecked<double>(family, l);
}

namespace {

// Orbit generators. Weights below are normalized to sum to one and are
// scaled by the reference area when the rule is built.
struct RuleBuilder {
  QuadratureRule rule;

  void centroid(double w) {
    rule.points.emplace_back(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
    rule.weights.push_back(0.5 * w);
  }
  void orbit3(double a, double w) {
    const double b = 1.0 - 2.0 * a;
    for (const Barycentric& p : {Barycentric(b, a, a), Barycentric(a, b, a), Barycentric(a, a, b)}) {
      rule.points.push_back(p);
      rule.weights.push_back(0.5 * w);
    }
  }
  void orbit6(double a, double b, double w) {
    const double c = 1.0 - a - b;
    for (const Barycentric& p : {Barycentric(a, b, c), Barycentric(a, c, b), Barycentric(b, a, c),
                                 Barycentric(b, c, a), Barycentric(c, a, b), Barycentric(c, b, a)}) {
      rule.points.push_back(p);
      rule.weights.push_back(0.5 * w);
    }
  }
};

QuadratureRule make_degree1() {
  RuleBuilder b;
  b.rule.exact_degree = 1;
  b.centroid(1.0);
  return b.rule;
}

QuadratureRule make_degree2() {
  RuleBuilder b;
  b.rule.exact_degree = 2;
  b.orbit3(1.0 / 6.0, 1.0 / 3.0);
  return b.rule;
}

QuadratureRule make_degree5() {
  RuleBuilder b;
  b.rule.exact_degree = 5;
  const double s15 = std::sqrt(15.0);
  b.centroid(9.0 / 40.0);
  b.orbit3((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
  b.orbit3((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
  return b.rule;
}

// 16 points.
QuadratureRule make_degree8() {
  RuleBuilder b;
  b.rule.exact_degree = 8;
  b.centroid(0.14431560767778716825);
  b.orbit3(0.45929258829272315603, 0.095091634267284624794);
  b.orbit3(0.17056930775176020662, 0.10321737053471825028);
  b.orbit3(0.050547228317030975458, 0.032458497623198080311);
  b.orbit6(0.26311282963463811342, 0.0083947774099576053372, 0.027230314174434994265);
  return b.rule;
}

// 25 points.
QuadratureRule make_degree10() {
  RuleBuilder b;
  b.rule.exact_degree = 10;
  b.centroid(0.090817990382753580095);
  b.orbit3(0.48557763338365737737, 0.036725957756466704717);
  b.orbit3(0.1094815754850370548, 0.045321059435527934783);
  b.orbit6(0.14170721941487995476, 0.30793983876412095017, 0.072757916845420108604);
  b.orbit6(0.025003534762686386074, 0.24667256063990269392, 0.028327242531057484837);
  b.orbit6(0.0095408154002994575802, 0.066803251012200265774, 0.0094216669637328234599);
  return b.rule;
}

}  // namespace

const QuadratureRule& quadrature_rule(int min_degree) {
  static const std::array<QuadratureRule, 5> rules = {make_degree1(), make_degree2(), make_degree5(),
                                                      make_degree8(), make_degree10()};
  if (min_degree < 1 || min_degree > 10)
    throw std::out_of_range("quadrature_rule: unsupported degree " + std::to_string(min_degree));
  for (const auto& r : rules)
    if (r.exact_degree >= min_degree) return r;
  return rules.back();
}

Tabulation tabulate(ElementFamily family, const QuadratureRule& rule) {
  Tabulation t{family, {}};
  t.at.reserve(rule.points.size());
  for (const auto& p : rule.points) t.at.push_back(eval_basis_unchecked<double>(family, p));
  return t;
}

}  // namespace graddiv
