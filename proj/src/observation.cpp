#include "besov/observation.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "besov/errors.hpp"
#include "besov/rng.hpp"

namespace besov {

Observation simulate(const ForwardModel& model, const CoefficientTree& F_true, double eps,
                     std::uint64_t seed) {
    if (!(eps >= 0.0)) throw InvalidInput("simulate: eps must be nonnegative");
    Observation obs;
    obs.eps = eps;
    obs.seed = seed;
    obs.y = dwt_forward(model.evaluate(F_true), model.basis());
    if (eps > 0.0) {
        Rng rng(derive_seed(seed, 0x6f627331ULL));
        for (int k = 0; k <= obs.y.max_level(); ++k)
            for (double& v : obs.y.level(k)) v += eps * rng.normal();
    }
    return obs;
}

double log_likelihood(const Observation& obs, const ForwardModel& model,
                      const CoefficientTree& F) {
    if (!(obs.eps > 0.0)) throw InvalidInput("log_likelihood: eps must be positive");
    auto a = dwt_forward(model.evaluate(F), model.basis());
    const double inv_var = 1.0 / (obs.eps * obs.eps);
    return inv_var * obs.y.inner(a) - 0.5 * inv_var * a.inner(a);
}

void write_observation_csv(std::ostream& out, const Observation& obs) {
    out << "# eps=" << obs.eps << " seed=" << obs.seed << "\n";
    out << "level,index,value\n";
    out.precision(17);
    for (int k = 0; k <= obs.y.max_level(); ++k) {
        const auto& lv = obs.y.level(k);
        for (std::size_t l = 0; l < lv.size(); ++l)
            out << k << ',' << l << ',' << lv[l] << '\n';
    }
}

Observation read_observation_csv(std::istream& in, const WaveletBasis& basis) {
    Observation obs;
    obs.y = CoefficientTree(basis);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            if (line.rfind("# eps=", 0) == 0) {
                std::istringstream hdr(line.substr(6));
                hdr >> obs.eps;
            }
            continue;
        }
        if (line.rfind("level", 0) == 0) continue;
        std::istringstream row(line);
        int k;
        std::size_t l;
        double v;
        char comma;
        if (!(row >> k >> comma >> l >> comma >> v))
            throw InvalidInput("observation csv: malformed row: " + line);
        if (k < 0 || k > basis.J || l >= obs.y.level(k).size())
            throw InvalidInput("observation csv: index out of range");
        obs.y.level(k)[l] = v;
    }
    return obs;
}

} // namespace besov
