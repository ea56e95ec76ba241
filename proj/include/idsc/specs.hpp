#pragma once

// String specs for psi and targets as accepted on the command line. Adds the
// counterexample family on top of ApproxFunction::parse/TargetSequence::parse:
//
//   cx:<file.json>              an instance written by `counterexample --save`
//   cx:[paper:|desk:]e1,e2,...  built from a schedule of per-block eps

#include <fstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "idsc/approx.hpp"
#include "idsc/counterexample.hpp"
#include "idsc/errors.hpp"

namespace idsc {

inline bool is_counterexample_spec(std::string_view spec) { return spec.substr(0, 3) == "cx:"; }

inline CounterexampleInstance load_counterexample(const std::string& path)
{
    std::ifstream in(path);
    IDSC_REQUIRE(in.good(), "cannot open counterexample file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw usage_error("counterexample file '" + path + "': " + e.what());
    }
    return counterexample_from_json(j);
}

inline CounterexampleInstance counterexample_from_spec(std::string_view spec)
{
    IDSC_REQUIRE(is_counterexample_spec(spec), "not a cx: spec");
    std::string arg(spec.substr(3));
    IDSC_REQUIRE(!arg.empty(), "cx: spec needs a file or an eps list");
    if (arg.size() > 5 && arg.substr(arg.size() - 5) == ".json") return load_counterexample(arg);
    BlockSchedule schedule;
    const auto colon = arg.find(':');
    if (colon != std::string::npos) {
        schedule.mode = parse_prime_gap_mode(arg.substr(0, colon));
        arg = arg.substr(colon + 1);
    }
    for (const auto& part : detail::split(arg, ',')) schedule.eps.push_back(parse_rational(detail::trim(part)));
    return build_counterexample(schedule);
}

inline ApproxFunction parse_psi(std::string_view spec)
{
    if (is_counterexample_spec(spec)) return counterexample_from_spec(spec).psi_function(std::string(spec));
    return ApproxFunction::parse(spec);
}

inline TargetSequence parse_target(std::string_view spec, unsigned m)
{
    if (is_counterexample_spec(spec)) return counterexample_from_spec(spec).target_sequence(m, std::string(spec));
    return TargetSequence::parse(spec, m);
}

} // namespace idsc
