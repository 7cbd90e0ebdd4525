#include <chrono>
#include <iostream>
#include <map>
#include <string>

#include "carleman_lab/carleman_lab.hpp"

using namespace carleman_lab;

namespace {

struct Target {
    std::string experiment;
    ExperimentPart part;
    double budget_s;  // runtime ceiling, 0 when the criterion has none
};

const std::map<std::string, Target>& targets() {
    static const std::map<std::string, Target> t{
        {"c01", {"identity", identity_part, 30}},
        {"c02", {"identity", identity_part, 0}},
        {"c03", {"carleman", qplus_part, 0}},
        {"c03b", {"carleman", qplus_part, 0}},
        {"c04", {"subelliptic", subelliptic_part, 120}},
        {"c05", {"multipliers", multipliers_part, 0}},
        {"c06", {"uc-probe", wave_part, 30}},
        {"c07", {"ledger", ledger_part, 0}},
        {"c08", {"ledger", ledger_part, 0}},
        {"c09", {"stability", stability_part, 300}},
        {"c10", {"stability", stability_part, 0}},
    };
    return t;
}

bool run_one(const std::string& id) {
    const auto& tg = targets().at(id);
    const auto resolved = resolve_config({{"experiment", tg.experiment}});
    const auto ctx = make_context(resolved);
    ExperimentResult res;
    res.experiment = tg.experiment;
    const auto start = std::chrono::steady_clock::now();
    try {
        tg.part(ctx, res);
    } catch (const LabError& e) {
        std::cout << "FAIL " << id << "  " << e.name() << ": " << e.what() << '\n';
        return false;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const Check* c = res.find(id);
    if (!c) {
        std::cout << "FAIL " << id << "  check not produced\n";
        return false;
    }
    json measured = c->measured;
    measured["runtime_s"] = secs;
    bool ok = c->pass;
    if (tg.budget_s > 0 && secs > tg.budget_s) {
        ok = false;
        measured["runtime_budget_s"] = tg.budget_s;
    }
    std::cout << (ok ? "PASS " : "FAIL ") << id << "  " << c->name << "  " << measured.dump() << '\n';
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> ids;
    for (int i = 1; i < argc; ++i) ids.emplace_back(argv[i]);
    if (ids.empty())
        for (const auto& [id, _] : targets()) ids.push_back(id);
    bool all = true;
    for (const auto& id : ids) {
        if (!targets().count(id)) {
            std::cerr << "unknown criterion '" << id << "'\n";
            return 2;
        }
        all = run_one(id) && all;
    }
    return all ? 0 : 1;
}
