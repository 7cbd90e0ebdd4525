#include <gtest/gtest.h>

#include "carleman_lab/experiments.hpp"

using namespace carleman_lab;

TEST(Config, DefaultsAreMaterialized) {
    for (const auto& name : experiment_names()) {
        const json r = resolve_config({{"experiment", name}});
        EXPECT_EQ(r.at("experiment"), name);
        EXPECT_EQ(r.at("output_dir"), "out");
        EXPECT_EQ(r.at("parameters"), experiment_defaults(name).at("parameters"));
        EXPECT_EQ(r.at("geometry"), experiment_defaults(name).at("geometry"));
        EXPECT_NO_THROW(make_context(r));
    }
}

TEST(Config, UserValuesOverrideDefaults) {
    const json r = resolve_config(
        {{"experiment", "ledger"}, {"output_dir", "x"}, {"parameters", {{"N", 2.0}}}, {"geometry", {{"r0", 3.0}}}});
    EXPECT_EQ(r["parameters"]["N"], 2.0);
    EXPECT_EQ(r["parameters"]["k_max"], 10);
    EXPECT_EQ(r["geometry"]["r0"], 3.0);
    EXPECT_EQ(r["output_dir"], "x");
}

TEST(Config, UnknownKeysAndExperimentsRejected) {
    EXPECT_THROW(resolve_config({{"experiment", "nope"}}), ConfigError);
    EXPECT_THROW(resolve_config({{"parameters", json::object()}}), ConfigError);
    EXPECT_THROW(resolve_config(json::array()), ConfigError);
    EXPECT_THROW(resolve_config({{"experiment", "ledger"}, {"extra", 1}}), ConfigError);
    EXPECT_THROW(resolve_config({{"experiment", "ledger"}, {"parameters", {{"Nx", 1}}}}), ConfigError);
    EXPECT_THROW(resolve_config({{"experiment", "identity"}, {"grid", {{"dx", 1}}}}), ConfigError);
    EXPECT_THROW(resolve_config({{"experiment", "stability"}, {"grid", {{"nt", 65}}}}), ConfigError);
}

TEST(Config, InvalidGeometryRejected) {
    const json r = resolve_config({{"experiment", "ledger"}, {"geometry", {{"mode", "polar"}}}});
    EXPECT_THROW(make_context(r), ConfigError);
    const json s = resolve_config({{"experiment", "ledger"}, {"geometry", {{"r0", 0.5}}}});
    EXPECT_THROW(make_context(s), ConfigError);
}

TEST(Config, SchemaListsEveryExperiment) {
    const json s = schema_json();
    for (const auto& name : experiment_names()) EXPECT_TRUE(s["defaults"].contains(name));
}

TEST(Experiments, TablesAreByteIdenticalOnRerun) {
    for (const char* name : {"identity", "ledger"}) {
        const json r = resolve_config({{"experiment", name}});
        const auto a = run_experiment(r), b = run_experiment(r);
        ASSERT_EQ(a.tables.size(), b.tables.size());
        for (std::size_t k = 0; k < a.tables.size(); ++k) {
            EXPECT_EQ(a.tables[k].first, b.tables[k].first);
            EXPECT_EQ(a.tables[k].second.str(), b.tables[k].second.str());
        }
        EXPECT_EQ(a.report.dump(), b.report.dump());
    }
}

TEST(Experiments, ChecksCarryMeasuredValues) {
    const auto res = run_experiment(resolve_config({{"experiment", "ledger"}}));
    ASSERT_NE(res.find("c07"), nullptr);
    ASSERT_NE(res.find("c08"), nullptr);
    EXPECT_TRUE(res.find("c07")->measured.contains("fold_max_rel_error"));
    EXPECT_EQ(res.find("c99"), nullptr);
}

TEST(Report, CsvFormatting) {
    CsvTable t({"a", "b", "c"});
    t.add_row({0.1, 3LL, std::string("x")});
    EXPECT_EQ(t.str(), "a,b,c\n0.10000000000000001,3,x\n");
    EXPECT_THROW(t.add_row({1.0}), ConfigError);
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(json_number(std::nan("")), "nan");
}
