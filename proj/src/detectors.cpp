#include "icc/detectors.hpp"

#include "icc/airmodel.hpp"
#include "icc/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace icc {

DetectorType detector_from_name(const std::string& name) {
    if (name == "ed") return DetectorType::ED;
    if (name == "med") return DetectorType::MED;
    if (name == "mmed") return DetectorType::MMED;
    if (name == "cav") return DetectorType::CAV;
    if (name == "ec") return DetectorType::EC;
    throw std::invalid_argument("unknown detector '" + name + "'");
}

std::string detector_name(DetectorType t) {
    switch (t) {
        case DetectorType::ED: return "ed";
        case DetectorType::MED: return "med";
        case DetectorType::MMED: return "mmed";
        case DetectorType::CAV: return "cav";
        case DetectorType::EC: return "ec";
    }
    throw std::logic_error("detector_name: bad enum");
}

Detector::Detector(DetectorType type, double sigma_u2) : type_(type), sigma_u2_(sigma_u2) {
    if (type == DetectorType::EC)
        throw std::invalid_argument("Detector: EC needs a prior, use estimator_correlator()");
    if ((type == DetectorType::ED || type == DetectorType::MED) && !(sigma_u2 > 0.0))
        throw std::invalid_argument("Detector: sigma_u2 must be positive");
}

Detector Detector::estimator_correlator(const ComplexMatrix& r_s, double sigma_u2) {
    if (!(sigma_u2 > 0.0))
        throw std::invalid_argument("estimator_correlator: sigma_u2 must be positive");
    if (!r_s.is_hermitian(1e-10))
        throw std::invalid_argument("estimator_correlator: prior must be Hermitian");
    const EigResult eig = hermitian_eig(r_s);
    const int m = r_s.rows();
    // W = V diag(mu / (mu + sigma^2)) V^H
    ComplexMatrix w(m, m);
    for (int t = 0; t < m; ++t) {
        const double mu = eig.values[t] > 0.0 ? eig.values[t] : 0.0;
        const double f = mu / (mu + sigma_u2);
        if (f == 0.0) continue;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                w(i, j) += f * eig.vectors(i, t) * std::conj(eig.vectors(j, t));
    }
    Detector d;
    d.type_ = DetectorType::EC;
    d.sigma_u2_ = sigma_u2;
    d.ec_weight_ = std::move(w);
    return d;
}

Detector Detector::for_scenario(DetectorType type, const ScenarioConfig& cfg) {
    if (type != DetectorType::EC) return Detector(type, cfg.sigma_u2_sense);
    ComplexMatrix r_s = antenna_correlation(cfg.m, cfg.rho);
    for (auto& z : r_s.data()) z *= cfg.sigma_s2 * cfg.sigma_h2;
    return estimator_correlator(r_s, cfg.sigma_u2_sense);
}

double Detector::statistic(const ComplexMatrix& r) const {
    const int m = r.rows();
    if (m != r.cols()) throw std::invalid_argument("statistic: covariance not square");
    if (!r.is_hermitian(1e-10))
        throw std::invalid_argument("statistic: covariance not Hermitian");

    switch (type_) {
        case DetectorType::ED:
            return r.trace().real() / (static_cast<double>(m) * sigma_u2_);
        case DetectorType::MED: {
            const EigResult eig = hermitian_eig(r);
            return eig.values.front() / sigma_u2_;
        }
        case DetectorType::MMED: {
            const EigResult eig = hermitian_eig(r);
            const double lmax = eig.values.front();
            const double lmin = eig.values.back();
            if (lmin <= 1e-14 * lmax)
                throw std::runtime_error("statistic: covariance numerically singular for mmed");
            return lmax / lmin;
        }
        case DetectorType::CAV: {
            double num = 0.0, den = 0.0;
            for (int p = 0; p < m; ++p) {
                for (int q = 0; q < m; ++q) num += std::abs(r(p, q));
                den += std::abs(r(p, p));
            }
            if (den == 0.0) throw std::runtime_error("statistic: zero diagonal in cav");
            return num / den;
        }
        case DetectorType::EC: {
            if (ec_weight_.rows() != m)
                throw std::invalid_argument("statistic: covariance size does not match ec prior");
            cdouble t = 0.0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    t += ec_weight_(i, j) * r(j, i);
            return t.real();
        }
    }
    throw std::logic_error("statistic: bad enum");
}

int local_decision(double statistic, double threshold) {
    return statistic > threshold ? 1 : 0;
}

} // namespace icc
