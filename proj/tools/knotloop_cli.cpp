// knotloop: 1-loop invariant versus the potential-function invariant for
// 2-bridge knots.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "knotloop/report.hpp"

using namespace knotloop;

namespace {

std::pair<long long, long long> parse_fraction(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) throw InvalidTwist("fraction must look like p/q");
    try {
        size_t a = 0, b = 0;
        long long p = std::stoll(s.substr(0, slash), &a);
        long long q = std::stoll(s.substr(slash + 1), &b);
        if (a != slash || b != s.size() - slash - 1) throw InvalidTwist("fraction must look like p/q");
        return {p, q};
    } catch (const std::logic_error&) {
        throw InvalidTwist("fraction must look like p/q");
    }
}

struct Options {
    std::string twists, fraction, gluing;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    bool json = false, verify = false, timings = false, dump = false;
    int max_crossings = 8, threads = 0;

    RunConfig config() const {
        RunConfig c;
        if (!twists.empty()) c.twists = parse_twists(twists);
        if (!fraction.empty()) c.fraction = parse_fraction(fraction);
        if (!gluing.empty()) c.gluing = gluing;
        c.tolerance = tol;
        c.seed = seed;
        c.json = json;
        c.verify = verify;
        c.timings = timings;
        c.dump_diagram = dump;
        c.max_crossings = max_crossings;
        c.threads = threads;
        return c;
    }
};

void common_flags(CLI::App* sub, Options& o) {
    sub->add_option("--tol", o.tol, "relative tolerance for tau = +-omega");
    sub->add_option("--seed", o.seed, "seed for random Newton restarts");
    sub->add_flag("--json", o.json, "print a JSON report");
    sub->add_flag("--timings", o.timings, "record stage timings");
}

int emit(const Report& r, bool json) {
    if (json)
        std::cout << report_to_json(r).dump(2) << "\n";
    else
        std::cout << format_text(r);
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1-loop invariant and potential-function invariant of 2-bridge knots"};
    app.require_subcommand(1);
    Options o;

    auto* compute = app.add_subcommand("compute", "compute tau and omega for one knot");
    auto* tw = compute->add_option("--twists", o.twists, "twist vector, e.g. 4,2");
    auto* fr = compute->add_option("--fraction", o.fraction, "2-bridge fraction p/q");
    tw->excludes(fr);
    compute->add_flag("--verify", o.verify, "run every identity check");
    compute->add_flag("--dump-diagram", o.dump, "print the labeled diagram as JSON");
    common_flags(compute, o);

    auto* gluing = app.add_subcommand("gluing", "compute tau from a gluing-data file");
    gluing->add_option("--gluing", o.gluing, "gluing-data JSON file")->required();
    common_flags(gluing, o);

    auto* sweep = app.add_subcommand("sweep", "run every 2-bridge knot up to a crossing bound");
    sweep->add_option("--max-crossings", o.max_crossings, "largest crossing number")->check(CLI::Range(4, 14));
    sweep->add_option("--threads", o.threads, "worker threads, 0 for all cores");
    sweep->add_flag("--verify", o.verify, "run every identity check");
    common_flags(sweep, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        RunConfig c = o.config();
        if (compute->parsed()) {
            if (c.dump_diagram && c.twists) {
                std::cout << diagram_to_json(label_segments(build_two_bridge(*c.twists))).dump(2) << "\n";
            }
            return emit(cmd_compute(c), c.json);
        }
        if (gluing->parsed()) return emit(cmd_from_gluing(c), c.json);
        if (sweep->parsed()) {
            SweepResult s = cmd_sweep(c);
            if (c.json) {
                std::cout << sweep_to_json(s).dump(2) << "\n";
            } else {
                for (const auto& r : s.rows) {
                    if (!r.error.empty())
                        std::printf("%-14s ERROR %s\n", r.knot.c_str(), r.error.c_str());
                    else
                        std::printf("%-14s vol %10.6f  tau %+.8f%+.8fi  rel %.2e  %s\n", r.knot.c_str(), r.volume,
                                    r.tau.real(), r.tau.imag(), r.relative, r.pass && r.exit_code == 0 ? "PASS" : "FAIL");
                }
                std::printf("%zu knots, skipped %d links and %d torus knots, max relative discrepancy %.3e, %s\n",
                            s.rows.size(), s.skipped_links, s.skipped_torus, s.max_relative,
                            s.all_pass ? "all pass" : "FAILURES");
            }
            return s.all_pass ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}
