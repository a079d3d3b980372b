// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/model_io.hpp"

#include "linearcredit/errors.hpp"

#include <fstream>
#include <set>

namespace linearcredit {

namespace json_io {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    require(j.is_object(), ErrorKind::InvalidInput, where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        require(ok.count(key) > 0, ErrorKind::InvalidInput, where + ": unknown key \"" + key + "\"");
}

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& where) {
    require(j.contains(key), ErrorKind::InvalidInput, where + ": missing key \"" + key + "\"");
    return j.at(key);
}

double as_number(const nlohmann::json& v, const std::string& where) {
    require(v.is_number(), ErrorKind::InvalidInput, where + ": expected a number");
    const double d = v.get<double>();
    require(std::isfinite(d), ErrorKind::InvalidInput, where + ": value is not finite");
    return d;
}

Vector as_vector(const nlohmann::json& v, const std::string& where, Eigen::Index size) {
    require(v.is_array(), ErrorKind::InvalidInput, where + ": expected an array");
    require(static_cast<Eigen::Index>(v.size()) == size, ErrorKind::InvalidInput,
            where + ": expected " + std::to_string(size) + " entries");
    Vector out(size);
    for (Eigen::Index i = 0; i < size; ++i)
        out(i) = as_number(v[static_cast<std::size_t>(i)], where);
    return out;
}

}  // namespace

double number(const nlohmann::json& j, const char* key, const std::string& where) {
    return as_number(field(j, key, where), where + "." + key);
}

int integer(const nlohmann::json& j, const char* key, const std::string& where) {
    const auto& v = field(j, key, where);
    require(v.is_number_integer(), ErrorKind::InvalidInput,
            where + "." + key + ": expected an integer");
    return v.get<int>();
}

Vector vector(const nlohmann::json& j, const char* key, const std::string& where,
              Eigen::Index size) {
    return as_vector(field(j, key, where), where + "." + key, size);
}

Matrix matrix(const nlohmann::json& j, const char* key, const std::string& where,
              Eigen::Index rows, Eigen::Index cols) {
    const auto& v = field(j, key, where);
    const std::string w = where + "." + key;
    require(v.is_array() && static_cast<Eigen::Index>(v.size()) == rows, ErrorKind::InvalidInput,
            w + ": expected " + std::to_string(rows) + " rows");
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        out.row(i) = as_vector(v[static_cast<std::size_t>(i)], w, cols).transpose();
    return out;
}

nlohmann::json to_json(const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v(i));
    return a;
}

nlohmann::json to_json(const Matrix& m) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        a.push_back(to_json(Vector(m.row(i).transpose())));
    return a;
}

State state(const nlohmann::json& j, int m, const std::string& where) {
    check_keys(j, {"y", "x"}, where);
    State s{number(j, "y", where), vector(j, "x", where, m)};
    check_state(s, m);
    return s;
}

}  // namespace json_io

using namespace json_io;

LhcParams ModelFile::as_lhc() const {
    switch (kind) {
    case ModelKind::Lhcc:
        return lhcc_embed(lhcc);
    case ModelKind::Lhc:
        return lhc;
    case ModelKind::Linear:
        break;
    }
    fail(ErrorKind::Unsupported, "model: a linear model has no LHC parameters");
}

LinearModel ModelFile::as_linear() const {
    return kind == ModelKind::Linear ? linear : to_linear(as_lhc());
}

ModelFile model_from_json(const nlohmann::json& j) {
    require(j.is_object() && j.contains("type") && j.at("type").is_string(),
            ErrorKind::InvalidInput, "model: missing string key \"type\"");
    const std::string type = j.at("type").get<std::string>();
    ModelFile out;
    int m = 0;
    if (type == "lhcc") {
        check_keys(j, {"type", "m", "gamma1", "kappa", "theta", "sigma", "state"}, "model");
        m = integer(j, "m", "model");
        require(m >= 1, ErrorKind::InvalidInput, "model.m: must be at least 1");
        out.kind = ModelKind::Lhcc;
        out.lhcc.m = m;
        out.lhcc.gamma1 = number(j, "gamma1", "model");
        out.lhcc.kappa = vector(j, "kappa", "model", m);
        out.lhcc.theta = vector(j, "theta", "model", m);
        out.lhcc.sigma = vector(j, "sigma", "model", m);
        check_dimensions(out.lhcc);
    } else if (type == "lhc") {
        check_keys(j, {"type", "m", "gamma", "b", "beta", "sigma", "state"}, "model");
        m = integer(j, "m", "model");
        require(m >= 1, ErrorKind::InvalidInput, "model.m: must be at least 1");
        out.kind = ModelKind::Lhc;
        out.lhc.m = m;
        out.lhc.gamma = vector(j, "gamma", "model", m);
        out.lhc.b = vector(j, "b", "model", m);
        out.lhc.beta = matrix(j, "beta", "model", m, m);
        out.lhc.sigma = vector(j, "sigma", "model", m);
        check_dimensions(out.lhc);
    } else if (type == "linear") {
        check_keys(j, {"type", "n", "m", "c", "gamma", "b", "beta", "a", "state"}, "model");
        const int n = integer(j, "n", "model");
        m = integer(j, "m", "model");
        require(n >= 1 && m >= 0, ErrorKind::InvalidInput, "model: need n >= 1 and m >= 0");
        out.kind = ModelKind::Linear;
        LinearModel& lm = out.linear;
        lm.n = n;
        lm.m = m;
        lm.c = matrix(j, "c", "model", n, n);
        lm.gamma_block = matrix(j, "gamma", "model", n, m);
        lm.b = matrix(j, "b", "model", m, n);
        lm.beta = matrix(j, "beta", "model", m, m);
        lm.a = vector(j, "a", "model", n);
        check_dimensions(lm);
        require(!j.contains("state"), ErrorKind::InvalidInput,
                "model: linear models take the state as a stacked vector elsewhere");
    } else {
        fail(ErrorKind::InvalidInput, "model.type: expected lhcc, lhc or linear, got \"" + type + "\"");
    }
    if (j.contains("state"))
        out.state = state(j.at("state"), m, "model.state");
    return out;
}

nlohmann::json model_to_json(const ModelFile& m) {
    nlohmann::json j;
    switch (m.kind) {
    case ModelKind::Lhcc:
        j = {{"type", "lhcc"},
             {"m", m.lhcc.m},
             {"gamma1", m.lhcc.gamma1},
             {"kappa", to_json(m.lhcc.kappa)},
             {"theta", to_json(m.lhcc.theta)},
             {"sigma", to_json(m.lhcc.sigma)}};
        break;
    case ModelKind::Lhc:
        j = {{"type", "lhc"},
             {"m", m.lhc.m},
             {"gamma", to_json(m.lhc.gamma)},
             {"b", to_json(m.lhc.b)},
             {"beta", to_json(m.lhc.beta)},
             {"sigma", to_json(m.lhc.sigma)}};
        break;
    case ModelKind::Linear:
        j = {{"type", "linear"},
             {"n", m.linear.n},
             {"m", m.linear.m},
             {"c", to_json(m.linear.c)},
             {"gamma", to_json(m.linear.gamma_block)},
             {"b", to_json(m.linear.b)},
             {"beta", to_json(m.linear.beta)},
             {"a", to_json(m.linear.a)}};
        break;
    }
    if (m.state)
        j["state"] = {{"y", m.state->y}, {"x", to_json(m.state->x)}};
    return j;
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::InvalidInput, "cannot open model file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidInput, "model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace linearcredit
