// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include "linearcredit/errors.hpp"
#include "linearcredit/model_io.hpp"

#include <gtest/gtest.h>

using namespace linearcredit;
using nlohmann::json;

namespace {

ErrorKind kind_of(const json& j) {
    try {
        model_from_json(j);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error for " << j.dump();
    return ErrorKind::Unsupported;
}

json bombardier_json() {
    return json::parse(R"({"type":"lhcc","m":2,"gamma1":0.205,"kappa":[0.546,0.421],
                           "theta":[0.624,0.512],"sigma":[0.5,0.5]})");
}

}  // namespace

TEST(ModelJson, LhccRoundTrip) {
    const ModelFile m = model_from_json(bombardier_json());
    EXPECT_EQ(m.kind, ModelKind::Lhcc);
    EXPECT_DOUBLE_EQ(m.lhcc.kappa(1), 0.421);
    EXPECT_FALSE(m.state.has_value());
    const ModelFile back = model_from_json(model_to_json(m));
    EXPECT_EQ(back.lhcc.theta, m.lhcc.theta);
    EXPECT_EQ(m.as_lhc().beta, lhcc_embed(m.lhcc).beta);
}

TEST(ModelJson, LhcWithState) {
    const json j = json::parse(R"({"type":"lhc","m":1,"gamma":[0.25],"b":[0.2],"beta":[[-1.05]],
                                   "sigma":[0.75],"state":{"y":1,"x":[0.2]}})");
    const ModelFile m = model_from_json(j);
    ASSERT_TRUE(m.state.has_value());
    EXPECT_DOUBLE_EQ(m.state->x(0), 0.2);
    const LhcParams ref = lc_test::one_factor();
    EXPECT_DOUBLE_EQ(m.lhc.b(0), ref.b(0));
    EXPECT_EQ(model_to_json(m), j);
    EXPECT_EQ(m.as_linear().dim(), 2);
}

TEST(ModelJson, Linear) {
    const json j = json::parse(R"({"type":"linear","n":1,"m":1,"c":[[0]],"gamma":[[-0.25]],
                                   "b":[[0.2]],"beta":[[-1.05]],"a":[1]})");
    const ModelFile m = model_from_json(j);
    EXPECT_EQ(m.kind, ModelKind::Linear);
    EXPECT_EQ(model_to_json(m), j);
    EXPECT_THROW(m.as_lhc(), Error);
}

TEST(ModelJson, StrictSchema) {
    json j = bombardier_json();
    j["extra"] = 1;
    EXPECT_EQ(kind_of(j), ErrorKind::InvalidInput);
    j = bombardier_json();
    j.erase("theta");
    EXPECT_EQ(kind_of(j), ErrorKind::InvalidInput);
    j = bombardier_json();
    j["kappa"] = {0.5};
    EXPECT_EQ(kind_of(j), ErrorKind::InvalidInput);
    j = bombardier_json();
    j["gamma1"] = "0.2";
    EXPECT_EQ(kind_of(j), ErrorKind::InvalidInput);
    j = bombardier_json();
    j["m"] = 2.5;
    EXPECT_EQ(kind_of(j), ErrorKind::InvalidInput);
    j = bombardier_json();
    j["type"] = "affine";
    EXPECT_EQ(kind_of(j), ErrorKind::InvalidInput);
    j = bombardier_json();
    j["state"] = {{"y", 0.5}, {"x", {0.6, 0.1}}};
    EXPECT_THROW(model_from_json(j), Error);
    EXPECT_EQ(kind_of(json::array()), ErrorKind::InvalidInput);
}
