#include <doctest.h>

#include "dabp/generators.hpp"
#include "dabp/instance_io.hpp"

using namespace dabp;

namespace {

bool structurally_equal(const COPInstance& a, const COPInstance& b) {
    if (a.domains != b.domains || a.functions.size() != b.functions.size()) return false;
    for (std::size_t l = 0; l < a.functions.size(); ++l)
        if (a.functions[l].scope != b.functions[l].scope ||
            a.functions[l].table != b.functions[l].table)
            return false;
    return true;
}

} // namespace

TEST_CASE("generated wgcp round-trips structurally and byte-for-byte") {
    GeneratorConfig cfg;
    cfg.family = Family::Wgcp;
    cfg.num_variables = 10;
    cfg.p1 = 0.4;
    cfg.seed = 31;
    const COPInstance inst = gen_wgcp(cfg);

    const std::string text = to_text(inst);
    const COPInstance back = from_text(text);
    CHECK(structurally_equal(inst, back));
    CHECK(back.meta.family == "wgcp");
    CHECK(back.meta.seed == 31);
    CHECK(to_text(back) == text);
}

TEST_CASE("instance without functions round-trips") {
    COPInstance inst;
    inst.domains = {3, 1, 4};
    const COPInstance back = from_text(to_text(inst));
    CHECK(structurally_equal(inst, back));
}

TEST_CASE("awkward doubles survive the 17-digit format") {
    COPInstance inst;
    inst.domains = {2};
    inst.functions.push_back({{0}, {0.1 + 0.2, 1.0 / 3.0}});
    const COPInstance back = from_text(to_text(inst));
    CHECK(back.functions[0].table[0] == inst.functions[0].table[0]);
    CHECK(back.functions[0].table[1] == inst.functions[0].table[1]);
}

TEST_CASE("corrupt scope reference names the function") {
    const std::string text = R"({
      "version": 1,
      "domains": [2, 2],
      "functions": [
        {"scope": [0, 1], "table": [1, 2, 3, 4]},
        {"scope": [0, 7], "table": [1, 2, 3, 4]}
      ],
      "meta": {"family": "", "params": {}, "seed": 0}
    })";
    CHECK_THROWS_WITH_AS(from_text(text), doctest::Contains("function 1"),
                         std::runtime_error);
}

TEST_CASE("malformed json reports a parse error") {
    CHECK_THROWS_WITH_AS(from_text("{\"version\": 1,"), doctest::Contains("parse error"),
                         std::runtime_error);
    CHECK_THROWS_AS(from_text("{\"version\": 2}"), std::runtime_error);
}

TEST_CASE("file save and load") {
    GeneratorConfig cfg;
    cfg.family = Family::RandomCop;
    cfg.num_variables = 6;
    cfg.p1 = 0.6;
    cfg.domain_size = 3;
    cfg.seed = 4;
    const COPInstance inst = gen_random_cop(cfg);

    const auto path = std::filesystem::temp_directory_path() / "dabp_io_test.json";
    save_instance(inst, path);
    const COPInstance back = load_instance(path);
    CHECK(structurally_equal(inst, back));
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_instance("/nonexistent/nope.json"), std::runtime_error);
}
