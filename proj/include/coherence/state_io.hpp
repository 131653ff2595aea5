#pragma once

// JSON state format: {"dim": d, "re": [[...]], "im": [[...]]}.

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include "quantum_core.hpp"

namespace coherence {

using json = nlohmann::json;

inline json state_to_json(const DensityMatrix &rho) {
    const auto d = static_cast<Eigen::Index>(rho.dim());
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < d; ++i) {
        json rr = json::array(), ir = json::array();
        for (Eigen::Index j = 0; j < d; ++j) {
            rr.push_back(rho.matrix()(i, j).real());
            ir.push_back(rho.matrix()(i, j).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ir));
    }
    return json{{"dim", rho.dim()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

namespace detail {

inline void read_square(const json &rows, std::size_t d, const char *field, Matrix &m, bool imaginary) {
    if (!rows.is_array() || rows.size() != d)
        throw InvalidState("shape", std::string("'") + field + "' must be a " + std::to_string(d) + "-row array");
    for (std::size_t i = 0; i < d; ++i) {
        const json &row = rows[i];
        if (!row.is_array() || row.size() != d)
            throw InvalidState("shape", std::string("'") + field + "' row " + std::to_string(i) + " must have " +
                                            std::to_string(d) + " entries");
        for (std::size_t j = 0; j < d; ++j) {
            if (!row[j].is_number())
                throw InvalidState("shape", std::string("'") + field + "' entry is not a number");
            const double v = row[j].get<double>();
            auto &z = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            z = imaginary ? Complex(z.real(), v) : Complex(v, z.imag());
        }
    }
}

} // namespace detail

/// Parses and validates; failures name the violated invariant.
inline DensityMatrix state_from_json(const json &j, const Tolerances &tol = default_tolerances()) {
    if (!j.is_object()) throw InvalidState("shape", "state must be a JSON object");
    for (const auto &[key, _] : j.items())
        if (key != "dim" && key != "re" && key != "im") throw InvalidState("shape", "unknown field '" + key + "'");
    if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() <= 0)
        throw InvalidState("shape", "'dim' must be a positive integer");
    if (!j.contains("re")) throw InvalidState("shape", "missing 're'");
    const auto d = j["dim"].get<std::size_t>();
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    detail::read_square(j["re"], d, "re", m, false);
    if (j.contains("im")) detail::read_square(j["im"], d, "im", m, true);
    return DensityMatrix(m, tol);
}

inline DensityMatrix load_state(const std::string &path, const Tolerances &tol = default_tolerances()) {
    std::ifstream in(path);
    if (!in) throw InvalidState("io", "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw InvalidState("syntax", e.what());
    }
    return state_from_json(j, tol);
}

inline void save_state(const DensityMatrix &rho, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << state_to_json(rho).dump(2) << '\n';
}

} // namespace coherence
