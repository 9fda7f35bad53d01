#include "bsdelab/generator.hpp"

#include <algorithm>
#include <cmath>

#include "bsdelab/errors.hpp"
#include "bsdelab/math_util.hpp"

namespace bsdelab {

double GeneratorSpec::at_zero(double t, double y, std::size_t dim) const {
  std::vector<double> z(dim, 0.0);
  return eval(t, y, std::span<const double>(z));
}

GeneratorSpec shift_generator(const GeneratorSpec& f, std::function<double(double)> delta,
                              double delta_sup, const std::string& suffix) {
  if (!(delta_sup >= 0.0)) throw DomainError("shift_generator: delta_sup must be nonnegative");
  GeneratorSpec g = f;
  g.name = f.name + suffix;
  auto base = f.eval;
  g.eval = [base, delta](double t, double y, std::span<const double> z) {
    return base(t, y, z) + delta(t);
  };
  g.linear_growth = f.linear_growth + delta_sup;
  return g;
}

TerminalSpec shift_terminal(const TerminalSpec& xi, const TerminalSpec& eta, double weight,
                            const std::string& suffix) {
  TerminalSpec out;
  out.name = xi.name + suffix;
  auto base = xi.eval;
  auto bump = eta.eval;
  out.eval = [base, bump, weight](std::span<const double> wt, std::span<const double> lv,
                                  std::size_t nn, std::size_t d) {
    return base(wt, lv, nn, d) + weight * bump(wt, lv, nn, d);
  };
  return out;
}

std::vector<double> evaluate_terminal(const TerminalSpec& xi, const BrownianEnsemble& ens) {
  const BrownianLevels lv = BrownianLevels::from(ens);
  std::vector<double> out(ens.n_paths());
  parallel_for(ens.n_paths(), [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p) {
      std::span<const double> row(lv.values.data() + p * lv.n_nodes * lv.dim,
                                  lv.n_nodes * lv.dim);
      std::span<const double> wt = row.subspan((lv.n_nodes - 1) * lv.dim, lv.dim);
      out[p] = xi.eval(wt, row, lv.n_nodes, lv.dim);
    }
  });
  return out;
}

void girsanov_kernel(const GeneratorSpec& f, double t, double y, std::span<const double> z,
                     std::span<double> out) {
  if (out.size() != z.size()) throw DimensionError("girsanov_kernel: output size mismatch");
  double nsq = 0.0;
  for (double v : z) nsq += v * v;
  if (nsq == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double diff = f.eval(t, y, z) - f.at_zero(t, y, z.size());
  const double scale = diff / nsq;
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = scale * z[k];
}

}  // namespace bsdelab
