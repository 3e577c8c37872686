#pragma once

// Channel files, certificate documents and the bound-curve CSV.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "channel.hpp"
#include "elias.hpp"
#include "error.hpp"
#include "theta.hpp"

namespace thetabound::io {

using nlohmann::json;

/// {"W": [[...], ...], "input_labels": [...], "output_labels": [...]}, rows indexed by input.
inline Channel channel_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("W")) throw ValidationError("channel document needs a \"W\" matrix");
    const json& w = doc.at("W");
    if (!w.is_array() || w.empty()) throw ValidationError("\"W\" must be a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(w.size());
    if (!w.front().is_array()) throw ValidationError("\"W\" rows must be arrays");
    const auto cols = static_cast<Eigen::Index>(w.front().size());
    MatrixXd m(rows, cols);
    for (Eigen::Index x = 0; x < rows; ++x) {
        const json& row = w.at(static_cast<std::size_t>(x));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ValidationError("channel row " + std::to_string(x) + " has the wrong length");
        for (Eigen::Index y = 0; y < cols; ++y) {
            const json& e = row.at(static_cast<std::size_t>(y));
            if (!e.is_number())
                throw ValidationError("channel row " + std::to_string(x) + " has a non-numeric entry");
            m(x, y) = e.get<double>();
        }
    }
    std::vector<std::string> in, out;
    if (doc.contains("input_labels")) in = doc.at("input_labels").get<std::vector<std::string>>();
    if (doc.contains("output_labels")) out = doc.at("output_labels").get<std::vector<std::string>>();
    return Channel(std::move(m), std::move(in), std::move(out));
}

inline Channel parse_channel(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("channel JSON: ") + e.what());
    }
    try {
        return channel_from_json(doc);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("channel JSON: ") + e.what());
    }
}

inline json channel_to_json(const Channel& c) {
    json w = json::array();
    for (Eigen::Index x = 0; x < c.matrix().rows(); ++x) {
        json row = json::array();
        for (Eigen::Index y = 0; y < c.matrix().cols(); ++y) row.push_back(c.matrix()(x, y));
        w.push_back(row);
    }
    json doc{{"W", w}};
    if (!c.input_labels().empty()) doc["input_labels"] = c.input_labels();
    if (!c.output_labels().empty()) doc["output_labels"] = c.output_labels();
    return doc;
}

/// A channel file path, or one of the built-ins `bsc:<p>`, `pentagon`, `identity:<k>`.
inline Channel load_channel(const std::string& spec) {
    auto number_after = [&](std::size_t prefix) {
        const std::string tail = spec.substr(prefix);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tail, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tail.size()) throw ValidationError("bad built-in channel parameter in '" + spec + "'");
        return v;
    };
    if (spec.rfind("bsc:", 0) == 0) return Channel::bsc(number_after(4));
    if (spec == "pentagon") return Channel::pentagon();
    if (spec.rfind("identity:", 0) == 0) {
        const double k = number_after(9);
        if (k < 2 || k != static_cast<double>(static_cast<long>(k)))
            throw ValidationError("identity:<k> needs an integer k >= 2");
        return Channel::identity(static_cast<std::size_t>(k));
    }
    std::ifstream in(spec);
    if (!in) throw ValidationError("cannot open channel file '" + spec + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_channel(ss.str());
}

inline json matrix_columns_to_json(const MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        json col = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) col.push_back(m(r, c));
        out.push_back(col);
    }
    return out;
}

inline json certificate_to_json(const ThetaCertificate& cert) {
    json doc{{"rho", cert.rho()},
             {"value", cert.value},
             {"residual", cert.feasibility_residual},
             {"feas_tol", cert.feas_tol},
             {"seed", cert.seed},
             {"restarts_used", cert.restarts_used},
             {"converged", cert.converged},
             {"vectors", matrix_columns_to_json(cert.representation.vectors())},
             {"handle", std::vector<double>(cert.handle.vector().data(),
                                            cert.handle.vector().data() + cert.handle.vector().size())}};
    if (cert.objective.is_minimax()) {
        doc["objective"] = "minimax";
    } else {
        const VectorXd& q = cert.objective.weights->vector();
        doc["objective"] = "weighted";
        doc["weights"] = std::vector<double>(q.data(), q.data() + q.size());
    }
    return doc;
}

inline VectorXd to_vector(const std::vector<double>& v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

/// Rebuilds a certificate from its JSON form, for independent re-verification with audit().
inline ThetaCertificate certificate_from_json(const json& doc) {
    try {
        const auto cols = doc.at("vectors").get<std::vector<std::vector<double>>>();
        if (cols.empty()) throw ValidationError("certificate has no vectors");
        MatrixXd u(static_cast<Eigen::Index>(cols.front().size()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (cols[c].size() != cols.front().size()) throw ValidationError("certificate vectors differ in length");
            u.col(static_cast<Eigen::Index>(c)) = to_vector(cols[c]);
        }
        Objective obj = doc.at("objective").get<std::string>() == "minimax"
                            ? Objective::minimax()
                            : Objective::weighted(Composition(to_vector(doc.at("weights").get<std::vector<double>>())));
        return ThetaCertificate{Representation(std::move(u), doc.at("rho").get<double>()),
                                Handle(to_vector(doc.at("handle").get<std::vector<double>>())),
                                doc.at("value").get<double>(),
                                doc.at("residual").get<double>(),
                                std::move(obj),
                                doc.value("restarts_used", 0),
                                doc.value("converged", false),
                                doc.value("seed", std::uint64_t{0}),
                                doc.value("feas_tol", 1e-8)};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("certificate JSON: ") + e.what());
    }
}

inline std::string full_precision(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

inline constexpr const char* kCurveHeader = "R_nats,d_bound_nats,rho,V_flat,theta,mutual_info";

/// One row per rate; rows with no admissible (rho, V) carry d_bound = inf and empty fields.
inline void write_curve_csv(std::ostream& os, const DistanceBoundCurve& curve) {
    os << kCurveHeader << '\n';
    for (const auto& pt : curve.points) {
        os << full_precision(pt.rate) << ',' << full_precision(pt.distance_bound) << ',';
        if (pt.provenance) {
            const BoundPoint& bp = *pt.provenance;
            os << full_precision(bp.rho) << ',';
            const MatrixXd& v = bp.v.matrix();
            for (Eigen::Index x = 0; x < v.rows(); ++x)
                for (Eigen::Index y = 0; y < v.cols(); ++y)
                    os << (x == 0 && y == 0 ? "" : ";") << full_precision(v(x, y));
            os << ',' << full_precision(bp.theta_pv) << ',' << full_precision(bp.mutual_info);
        } else {
            os << ",,,";
        }
        os << '\n';
    }
}

}  // namespace thetabound::io
