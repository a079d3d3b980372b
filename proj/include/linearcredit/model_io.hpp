// SPDX-License-Identifier: Apache-2.0
//
// JSON model files. Three schemas, selected by "type":
//   {"type":"lhcc","m":2,"gamma1":..,"kappa":[..],"theta":[..],"sigma":[..]}
//   {"type":"lhc","m":1,"gamma":[..],"b":[..],"beta":[[..]],"sigma":[..]}
//   {"type":"linear","n":1,"m":1,"c":[[..]],"gamma":[[..]],"b":[[..]],"beta":[[..]],"a":[..]}
// Each may carry an optional "state":{"y":..,"x":[..]}. Unknown keys are errors.
#pragma once

#include "linearcredit/model.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace linearcredit {

enum class ModelKind { Lhcc, Lhc, Linear };

struct ModelFile {
    ModelKind kind = ModelKind::Lhc;
    LhccParams lhcc;
    LhcParams lhc;
    LinearModel linear;
    std::optional<State> state;

    /// LHC parameters for lhcc and lhc files (the cascade embedding is not
    /// checked against its constraint here).
    [[nodiscard]] LhcParams as_lhc() const;
    [[nodiscard]] LinearModel as_linear() const;
};

ModelFile model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelFile& m);
ModelFile load_model(const std::string& path);

/// Strict readers shared with the CLI schemas.
namespace json_io {
void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& where);
double number(const nlohmann::json& j, const char* key, const std::string& where);
int integer(const nlohmann::json& j, const char* key, const std::string& where);
Vector vector(const nlohmann::json& j, const char* key, const std::string& where,
              Eigen::Index size);
Matrix matrix(const nlohmann::json& j, const char* key, const std::string& where,
              Eigen::Index rows, Eigen::Index cols);
nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Matrix& m);
State state(const nlohmann::json& j, int m, const std::string& where);
}  // namespace json_io

}  // namespace linearcredit
