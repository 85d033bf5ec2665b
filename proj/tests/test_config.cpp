#include <gtest/gtest.h>

#include "stefan/config.hpp"
#include "stefan/error.hpp"

using namespace stefan;

namespace {

template <class F>
ParseError catch_parse(F&& f)
{
    try {
        f();
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "no ParseError";
    return ParseError(-1, "", "");
}

} // namespace

TEST(Config, EmptyInputGivesFrozenHeat)
{
    SimConfig c = parse_config("");
    EXPECT_EQ(echo_config(c), echo_config(preset_config("frozen-heat")));
    EXPECT_EQ(c.n_theta, 64);
    EXPECT_EQ(c.n_r, 64);
    EXPECT_EQ(c.dt, 1e-4);
    EXPECT_EQ(c.t_end, 1.0);
    EXPECT_TRUE(c.frozen_gauge);
    ASSERT_EQ(c.q0_modes.size(), 1u);
    EXPECT_EQ(c.q0_modes[0].m, 0);
    EXPECT_EQ(c.q0_modes[0].k, 1);
    EXPECT_EQ(echo_config(parse_config("# only a comment\n\n   \n")), echo_config(c));
}

TEST(Config, NegativeDtNamesKeyAndLine)
{
    ParseError e = catch_parse([] { parse_config("n_r = 32\ndt = -0.1\n"); });
    EXPECT_EQ(e.key(), "dt");
    EXPECT_EQ(e.line(), 2);
}

TEST(Config, UnknownDuplicateAndMalformed)
{
    ParseError u = catch_parse([] { parse_config("dt = 1e-4\nbogus = 3\n"); });
    EXPECT_EQ(u.key(), "bogus");
    EXPECT_EQ(u.line(), 2);
    ParseError d = catch_parse([] { parse_config("dt = 1e-4\n# c\ndt = 2e-4\n"); });
    EXPECT_EQ(d.key(), "dt");
    EXPECT_EQ(d.line(), 3);
    ParseError m = catch_parse([] { parse_config("n_theta 32\n"); });
    EXPECT_EQ(m.line(), 1);
    ParseError v = catch_parse([] { parse_config("\nn_theta = 3x\n"); });
    EXPECT_EQ(v.key(), "n_theta");
    EXPECT_EQ(v.line(), 2);
    ParseError o = catch_parse([] { parse_config("n_theta = 17\n"); });
    EXPECT_EQ(o.key(), "n_theta");
    ParseError p = catch_parse([] { parse_config("preset = nonexistent\n"); });
    EXPECT_EQ(p.key(), "preset");
    ParseError s = catch_parse([] { parse_config("q0_modes = (0,1,sin)=1\n"); });
    EXPECT_EQ(s.key(), "q0_modes");
}

TEST(Config, RadialComparePreset)
{
    SimConfig c = parse_config("preset = radial-compare\n");
    EXPECT_TRUE(c.radial_oracle);
    EXPECT_FALSE(c.frozen_gauge);
    for (const auto& mc : c.q0_modes) EXPECT_EQ(mc.m, 0);
    EXPECT_TRUE(c.h0_modes.empty());
}

TEST(Config, PresetAppliesFirstWherever)
{
    SimConfig c = parse_config("dt = 5e-5\npreset = stefan-small\n");
    EXPECT_EQ(c.dt, 5e-5);
    EXPECT_EQ(c.epsilon, preset_config("stefan-small").epsilon);
}

TEST(Config, ModeListsParse)
{
    SimConfig c = parse_config("q0_modes = (0,1,cos)=1; (2,1,sin)=-0.25\nh0_modes = (3,cos)=0.01; (3,sin)=0.02\n");
    ASSERT_EQ(c.q0_modes.size(), 2u);
    EXPECT_EQ(c.q0_modes[1].m, 2);
    EXPECT_EQ(c.q0_modes[1].parity, Parity::sine);
    EXPECT_EQ(c.q0_modes[1].value, -0.25);
    ASSERT_EQ(c.h0_modes.size(), 1u);
    EXPECT_EQ(c.h0_modes[0].cos_coeff, 0.01);
    EXPECT_EQ(c.h0_modes[0].sin_coeff, 0.02);
}

TEST(Config, EchoRoundTripsEveryPreset)
{
    for (const auto& name : preset_names()) {
        SimConfig c = preset_config(name);
        c.epsilon = 0.1 / 3.0;
        c.h0_modes = {{2, 1.0 / 7.0, 0.0}};
        std::string e = echo_config(c);
        EXPECT_EQ(echo_config(parse_config(e)), e) << name;
    }
}

TEST(Config, EchoListsEveryKey)
{
    std::string e = echo_config(SimConfig{});
    for (const char* k : {"preset", "n_theta", "n_r", "dt", "t_end", "snapshot_stride", "n_modes", "q0_modes", "epsilon",
                          "h0_modes", "compatibility_mode", "validation", "eta", "c_bar", "bootstrap_c", "F_C",
                          "graph_floor", "gauge_min_j", "enthalpy_tol", "enforce_tol", "positivity_tol", "taylor_floor",
                          "frozen_gauge", "energy_order", "energy_time_order", "compute_energy", "duhamel",
                          "stencil_width", "fit_t_a", "fit_t_b", "radial_oracle", "radial_n_s", "radial_dt", "barrier",
                          "output_dir", "write_fields"}) {
        EXPECT_NE(e.find(std::string(k) + " = "), std::string::npos) << k;
    }
}

TEST(Config, PresetTableComplete)
{
    std::vector<std::string> want{"frozen-heat", "stefan-small", "stefan-mixture", "radial-compare", "barrier-check"};
    EXPECT_EQ(preset_names(), want);
    for (const auto& n : want) EXPECT_NO_THROW(validate_config(preset_config(n)));
    EXPECT_THROW(preset_config("nope"), DomainError);
}
