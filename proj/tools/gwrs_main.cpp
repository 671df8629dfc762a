// gwrs: uniformity norms of sets on discretized R^d, symmetrization
// comparisons, and near-maximizer experiments, from the command line.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gwrs/autocorr.hpp"
#include "gwrs/common.hpp"
#include "gwrs/gowers.hpp"
#include "gwrs/grid.hpp"
#include "gwrs/profile.hpp"
#include "gwrs/rearrange.hpp"
#include "gwrs/shapes.hpp"
#include "gwrs/stability.hpp"

namespace fs = std::filesystem;
using namespace gwrs;

namespace {

/// Hand-rolled JSON row with caller-fixed key order and canonical floats,
/// so reruns emit byte-identical lines.
class JsonRow {
public:
    JsonRow& field(const std::string& key, double v) { return raw(key, format_g17(v)); }
    JsonRow& field(const std::string& key, int v) { return raw(key, std::to_string(v)); }
    JsonRow& field(const std::string& key, std::int64_t v) { return raw(key, std::to_string(v)); }
    JsonRow& field(const std::string& key, std::uint64_t v) { return raw(key, std::to_string(v)); }
    JsonRow& field(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }
    JsonRow& field(const std::string& key, const std::string& v) {
        return raw(key, quote(v));
    }
    JsonRow& field(const std::string& key, const std::vector<double>& vs) {
        std::string s = "[";
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (i) s += ",";
            s += format_g17(vs[i]);
        }
        s += "]";
        return raw(key, s);
    }

    std::string str() const { return "{" + body_ + "}"; }

private:
    static std::string quote(const std::string& v) {
        std::string out = "\"";
        for (char c : v) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        out += '"';
        return out;
    }
    JsonRow& raw(const std::string& key, const std::string& value) {
        if (!body_.empty()) body_ += ",";
        body_ += quote(key) + ":" + value;
        return *this;
    }
    std::string body_;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct LoadedSet {
    GridFunction raster{GridSpec(1, 2, 1.0)};
    std::optional<ShapeSpec> shape;
    std::string hash;  // content hash of the spec text or grid file bytes
};

struct InputConfig {
    std::string shape_path;
    std::string grid_path;
    int dim = 0;  // 0 = infer
    int n = 256;
    double extent = 1.0;
    std::string raster_mode = "fractional";
    int subsamples = 4;
};

void add_input_flags(CLI::App* cmd, InputConfig& cfg) {
    cmd->add_option("--shape", cfg.shape_path,
                    "Analytic shape description file (JSON: balls, ellipsoids, boxes, "
                    "unions, differences, affine images)");
    cmd->add_option("--grid-in", cfg.grid_path, "Binary grid-function file (alternative to --shape)");
    cmd->add_option("-d,--d,--dim", cfg.dim, "Dimension (1-3); default: inferred from the input");
    cmd->add_option("-n,--n,--cells", cfg.n, "Cells per axis for rasterization");
    cmd->add_option("--extent", cfg.extent, "Grid half-width (domain [-extent, extent]^d)");
    cmd->add_option("--raster", cfg.raster_mode, "Raster mode: fractional or binary")
        ->check(CLI::IsMember({"fractional", "binary"}));
    cmd->add_option("--subsamples", cfg.subsamples, "Subsamples per axis for fractional rasters");
}

LoadedSet load_input(const InputConfig& cfg) {
    const bool have_shape = !cfg.shape_path.empty();
    const bool have_grid = !cfg.grid_path.empty();
    if (have_shape == have_grid)
        throw ConfigError("provide exactly one of --shape or --grid-in");

    LoadedSet out;
    if (have_grid) {
        const std::string bytes = read_file(cfg.grid_path);
        out.hash = fnv1a64_hex(bytes);
        out.raster = GridFunction::load(cfg.grid_path);
        if (cfg.dim != 0 && cfg.dim != out.raster.spec().dim())
            throw ConfigError("--dim conflicts with the grid file");
        return out;
    }
    const std::string text = read_file(cfg.shape_path);
    out.hash = fnv1a64_hex(text);
    ShapeSpec shape = ShapeSpec::parse(text);
    if (cfg.dim != 0 && cfg.dim != shape.dim())
        throw ConfigError("--dim conflicts with the shape description");
    if (cfg.n < 2) throw ConfigError("--cells must be at least 2");
    if (!(cfg.extent > 0.0)) throw ConfigError("--extent must be positive");
    const GridSpec grid(shape.dim(), cfg.n, cfg.extent);
    const RasterMode mode =
        cfg.raster_mode == "binary" ? RasterMode::binary : RasterMode::fractional;
    out.raster = rasterize(shape, grid, mode, cfg.subsamples, true);
    out.shape = std::move(shape);
    return out;
}

void emit(const std::string& line, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << line << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open " + out_path);
    out << line << '\n';
    if (!out) throw ConfigError("write failed for " + out_path);
}

// ---------------------------------------------------------------- norm

struct NormConfig {
    InputConfig input;
    int k = 2;
    std::string method = "recursive";
    bool compare_star = false;
    double budget = kDefaultNormBudget;
    bool pretty = false;
    std::string out_path;
};

int cmd_norm(const NormConfig& cfg) {
    const LoadedSet in = load_input(cfg.input);
    const GridFunction& e = in.raster;
    const double m = measure(e);

    GowersResult res;
    if (cfg.method == "fourier") {
        if (cfg.k != 2) throw ConfigError("--method fourier computes the order-2 norm only");
        res = u2_via_fourier(e);
    } else {
        res = gowers_norm(e, cfg.k, cfg.budget);
    }
    const double denom = m > 0.0
                             ? std::pow(m, static_cast<double>(cfg.k + 1) /
                                               std::ldexp(1.0, cfg.k))
                             : 0.0;
    const double nrm_ratio = m > 0.0 ? res.norm_value / denom : 0.0;

    JsonRow row;
    row.field("command", std::string("norm"))
        .field("shape_hash", in.hash)
        .field("k", cfg.k)
        .field("dim", e.spec().dim())
        .field("n", e.spec().cells())
        .field("extent", e.spec().extent())
        .field("method", res.method)
        .field("measure", m)
        .field("power_value", res.power_value)
        .field("norm_value", res.norm_value)
        .field("normalized_ratio", nrm_ratio);

    double star_norm = 0.0;
    if (cfg.compare_star) {
        const GridFunction star = radial_rearrangement(e);
        GowersResult sres;
        if (cfg.method == "fourier") {
            sres = u2_via_fourier(star);
        } else {
            sres = gowers_norm(star, cfg.k, cfg.budget);
        }
        star_norm = sres.norm_value;
        row.field("star_power_value", sres.power_value)
            .field("star_norm_value", sres.norm_value)
            .field("star_ratio", star_norm > 0.0 ? res.norm_value / star_norm : 0.0);
    }

    if (cfg.pretty) {
        std::ostringstream t;
        t << "order-" << cfg.k << " uniformity norm (" << res.method << ")\n"
          << "  measure        " << format_g17(m) << "\n"
          << "  power value    " << format_g17(res.power_value) << "\n"
          << "  norm value     " << format_g17(res.norm_value) << "\n"
          << "  normalized     " << format_g17(nrm_ratio) << "\n";
        if (cfg.compare_star)
            t << "  star norm      " << format_g17(star_norm) << "\n"
              << "  ratio to star  "
              << format_g17(star_norm > 0.0 ? res.norm_value / star_norm : 0.0) << "\n";
        emit(t.str(), cfg.out_path);
    } else {
        emit(row.str(), cfg.out_path);
    }
    return 0;
}

// ---------------------------------------------------------------- chain

struct ChainConfig {
    InputConfig input;
    int k = 2;
    std::string tilde = "matched";
    std::string profile_path;
    bool assert_monotone = false;
    double slack = 1e-8;
    double budget = kDefaultNormBudget;
    bool pretty = false;
    std::string out_path;
};

int cmd_chain(const ChainConfig& cfg) {
    const TildeSource tsrc =
        cfg.tilde == "closed" ? TildeSource::closed_form : TildeSource::matched_raster;

    if (!cfg.profile_path.empty()) {
        // chain terms for an explicitly supplied rearranged-autocorrelation
        // profile; the represented set measure is the square root of its mass
        const Profile1D f_star = Profile1D::load(cfg.profile_path);
        if (cfg.assert_monotone && !f_star.nonincreasing(0.0))
            throw AssertionError("supplied profile is not nonincreasing");
        const double mass = f_star.integral();
        if (!(mass > 0.0)) throw ConfigError("supplied profile has zero mass");
        const double m = std::sqrt(mass);
        const int dim = cfg.input.dim == 0 ? 1 : cfg.input.dim;
        const Profile1D tilde_p = tilde_f_star(dim, m);
        std::vector<double> terms;
        for (int j = 0; j <= cfg.k; ++j) {
            const std::array<const Profile1D*, 2> ps{&f_star, &tilde_p};
            const std::array<int, 2> ex{cfg.k - j, j};
            terms.push_back(integrate_product(ps, ex));
        }
        double worst = 0.0;
        double cmax = 0.0;
        for (double c : terms) cmax = std::max(cmax, std::abs(c));
        for (std::size_t j = 0; j + 1 < terms.size(); ++j)
            if (cmax > 0.0) worst = std::max(worst, (terms[j] - terms[j + 1]) / cmax);
        if (cfg.assert_monotone && worst > cfg.slack)
            throw AssertionError("chain terms decrease beyond tolerance: violation " +
                                 format_g17(worst));
        JsonRow row;
        row.field("command", std::string("chain"))
            .field("source", std::string("profile"))
            .field("k", cfg.k)
            .field("dim", dim)
            .field("measure", m)
            .field("terms", terms)
            .field("monotone_violation", worst);
        emit(cfg.pretty ? "chain terms: " + row.str() : row.str(), cfg.out_path);
        return 0;
    }

    const LoadedSet in = load_input(cfg.input);
    ChainReport rep;
    if (in.shape) {
        rep = chain_report_for_shape(*in.shape, in.raster.spec(), cfg.k, tsrc, cfg.budget);
    } else {
        rep = chain_report(in.raster, cfg.k, tsrc, cfg.budget);
    }

    if (cfg.assert_monotone && !rep.monotone(cfg.slack))
        throw AssertionError("chain terms decrease beyond tolerance: violation " +
                             format_g17(rep.max_monotone_violation()));

    JsonRow row;
    row.field("command", std::string("chain"))
        .field("source", std::string(in.shape ? "shape" : "grid"))
        .field("shape_hash", in.hash)
        .field("k", rep.k)
        .field("dim", rep.dim)
        .field("n", rep.n)
        .field("measure", rep.measure)
        .field("canonicalized", rep.canonicalized)
        .field("tilde", std::string(tsrc == TildeSource::matched_raster ? "matched" : "closed"))
        .field("terms", rep.terms)
        .field("set_power", rep.set_power)
        .field("star_power", rep.star_power)
        .field("gamma_ref", rep.gamma_ref)
        .field("lhs", rep.lhs)
        .field("rhs", rep.rhs)
        .field("tol", rep.tol)
        .field("spread", rep.spread())
        .field("monotone_violation", rep.max_monotone_violation());

    if (cfg.pretty) {
        std::ostringstream t;
        t << "interpolation chain, order " << rep.k << ", dim " << rep.dim << "\n";
        for (std::size_t j = 0; j < rep.terms.size(); ++j)
            t << "  c_" << j << " = " << format_g17(rep.terms[j]) << "\n";
        t << "  set power / gamma  = " << format_g17(rep.lhs) << "\n"
          << "  star power / gamma = " << format_g17(rep.rhs) << "\n"
          << "  tolerance          = " << format_g17(rep.tol) << "\n";
        emit(t.str(), cfg.out_path);
    } else {
        emit(row.str(), cfg.out_path);
    }
    return 0;
}

// ------------------------------------------------------------ stability

struct StabilityConfig {
    int dim = 2;
    int k = 2;
    int n = 256;
    double extent = 1.0;
    std::vector<double> amplitudes{0.05, 0.1, 0.2, 0.4};
    std::vector<std::uint64_t> seeds;
    int seed_count = 10;
    std::uint64_t seed_base = 1;
    bool refine = false;
    double budget = kDefaultNormBudget;
    std::string out_dir;
    bool pretty = false;
};

int cmd_stability(const StabilityConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    if (cfg.out_dir.empty() || !fs::is_directory(dir))
        throw ConfigError("output directory does not exist: " + cfg.out_dir);

    std::vector<std::uint64_t> seeds = cfg.seeds;
    if (seeds.empty()) {
        for (int i = 0; i < cfg.seed_count; ++i)
            seeds.push_back(cfg.seed_base + static_cast<std::uint64_t>(i));
    }
    const GridSpec grid(cfg.dim, cfg.n, cfg.extent);
    const std::vector<StabilityRecord> records =
        stability_sweep(cfg.dim, cfg.k, grid, cfg.amplitudes, seeds, cfg.refine, cfg.budget);

    std::ofstream rec_out(dir / "records.jsonl");
    if (!rec_out) throw ConfigError("cannot open records.jsonl for writing");
    std::ofstream plot_out(dir / "plot.tsv");
    if (!plot_out) throw ConfigError("cannot open plot.tsv for writing");
    plot_out << "delta\tepsilon\n";

    std::vector<double> deltas, epsilons;
    for (const StabilityRecord& r : records) {
        std::vector<double> center(r.fit.center.begin(), r.fit.center.begin() + r.dim);
        std::vector<double> matrix;
        for (int a = 0; a < r.dim; ++a)
            for (int b = 0; b < r.dim; ++b) matrix.push_back(r.fit.matrix[a][b]);
        JsonRow row;
        row.field("seed", r.seed)
            .field("amplitude", r.amplitude)
            .field("k", r.k)
            .field("dim", r.dim)
            .field("n", r.n)
            .field("measure", r.measure)
            .field("power_value", r.power_value)
            .field("gamma_ref", r.gamma_ref)
            .field("delta_raw", r.delta_raw)
            .field("delta", r.delta)
            .field("epsilon", r.epsilon)
            .field("fit_center", center)
            .field("fit_matrix", matrix);
        rec_out << row.str() << '\n';
        plot_out << format_g17(r.delta) << '\t' << format_g17(r.epsilon) << '\n';
        deltas.push_back(r.delta);
        epsilons.push_back(r.epsilon);
    }
    if (!rec_out || !plot_out) throw ConfigError("write failed in " + cfg.out_dir);

    double spearman = 0.0;
    bool have_spearman = false;
    if (records.size() >= 2) {
        try {
            spearman = spearman_correlation(deltas, epsilons);
            have_spearman = true;
        } catch (const ConfigError&) {
            // constant column (e.g. single amplitude 0); leave unset
        }
    }

    JsonRow row;
    row.field("command", std::string("stability"))
        .field("k", cfg.k)
        .field("dim", cfg.dim)
        .field("n", cfg.n)
        .field("records", static_cast<std::int64_t>(records.size()))
        .field("spearman_valid", have_spearman)
        .field("spearman", spearman)
        .field("out_dir", cfg.out_dir);
    if (cfg.pretty) {
        std::ostringstream t;
        t << records.size() << " records -> " << (dir / "records.jsonl").string() << "\n"
          << "spearman(delta, epsilon) = "
          << (have_spearman ? format_g17(spearman) : std::string("n/a")) << "\n";
        std::cout << t.str();
    } else {
        std::cout << row.str() << '\n';
    }
    return 0;
}

// ------------------------------------------------------------ rearrange

struct RearrangeConfig {
    InputConfig input;
    std::string out_dir = ".";
    bool bathtub_check = false;
    std::uint64_t check_seed = 7;
    bool pretty = false;
};

int cmd_rearrange(const RearrangeConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    if (!fs::is_directory(dir)) throw ConfigError("output directory does not exist: " + cfg.out_dir);

    const LoadedSet in = load_input(cfg.input);
    const GridFunction& e = in.raster;

    const GridFunction star = radial_rearrangement(e);
    star.save(dir / "star.grid");

    const Autocorrelation ac = autocorrelation(e);
    const Profile1D f_star = rearrangement_1d(ac.values);
    f_star.save(dir / "f_star.profile");
    const Profile1D big_f = cumulative_F(f_star);
    big_f.save(dir / "F.profile");

    if (cfg.bathtub_check) {
        std::mt19937_64 rng(cfg.check_seed * 0x9e3779b97f4a7c15ull + 1u);
        const double hi = std::max(f_star.support_end() * 1.2, 1e-3);
        for (int i = 0; i < 10; ++i) {
            const double t =
                hi * static_cast<double>(rng() >> 11) * 0x1.0p-53;
            const double oracle = bathtub_oracle(ac.values, t);
            const double exact = f_star.cumulative_at(t);
            const double scale = std::max({std::abs(oracle), std::abs(exact), 1e-30});
            if (std::abs(oracle - exact) > 1e-12 * scale)
                throw AssertionError("bathtub oracle disagrees with the cumulative at t = " +
                                     format_g17(t) + ": " + format_g17(oracle) + " vs " +
                                     format_g17(exact));
        }
    }

    JsonRow row;
    row.field("command", std::string("rearrange"))
        .field("shape_hash", in.hash)
        .field("dim", e.spec().dim())
        .field("n", e.spec().cells())
        .field("measure", measure(e))
        .field("autocorr_mass", ac.values.measure())
        .field("support_end", f_star.support_end())
        .field("F_total", f_star.integral())
        .field("out_dir", cfg.out_dir)
        .field("bathtub_checked", cfg.bathtub_check);
    if (cfg.pretty) {
        std::ostringstream t;
        t << "wrote star.grid, f_star.profile, F.profile to " << cfg.out_dir << "\n"
          << "  measure      " << format_g17(measure(e)) << "\n"
          << "  F(infinity)  " << format_g17(f_star.integral()) << "\n";
        std::cout << t.str();
    } else {
        std::cout << row.str() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "gwrs: Gowers-type uniformity norms of sets on discretized R^d.\n"
        "Computes the order-k norm whose 2^k power integrates shifted-product\n"
        "overlaps; compares sets against their symmetric decreasing\n"
        "rearrangements (Riesz-Sobolev / Brascamp-Lieb-Luttinger direction);\n"
        "runs near-maximizer stability experiments against fitted ellipsoids."};
    app.require_subcommand(1);
    app.fallthrough();  // app-level options may follow the subcommand name
    int threads = 0;
    app.add_option("--threads", threads,
                   "Worker-thread cap (default: GWRS_THREADS, else hardware); results "
                   "do not depend on it");

    NormConfig norm_cfg;
    CLI::App* norm = app.add_subcommand(
        "norm",
        "Order-k uniformity norm of a set: the 2^k-th root of the shift-integral "
        "of 2^k-fold products. Order 2 equals the L^2 norm of the autocorrelation; "
        "--method fourier recomputes it from the zero-padded power spectrum.");
    add_input_flags(norm, norm_cfg.input);
    norm->add_option("-k,--k,--order", norm_cfg.k, "Norm order k >= 1");
    norm->add_option("--method", norm_cfg.method, "recursive or fourier (order 2 only)")
        ->check(CLI::IsMember({"recursive", "fourier"}));
    norm->add_flag("--compare-star", norm_cfg.compare_star,
                   "Also compute the norm of the symmetric decreasing rearrangement "
                   "(the maximizer among equal-measure sets) and the ratio");
    norm->add_option("--budget", norm_cfg.budget, "Cost ceiling for the norm evaluation");
    norm->add_flag("--pretty", norm_cfg.pretty, "Human-readable table instead of a JSON row");
    norm->add_option("-o,--out", norm_cfg.out_path, "Write the result row to a file");

    ChainConfig chain_cfg;
    CLI::App* chain = app.add_subcommand(
        "chain",
        "Riesz-Sobolev interpolation chain between a set and its symmetrized "
        "ball: terms c_j integrate f_*^{k-j} tilde^j over shifts, where f_* is "
        "the nonincreasing rearrangement of the set's autocorrelation and tilde "
        "the ball reference; c_j is nondecreasing in j and sandwiches the "
        "normalized norm powers.");
    add_input_flags(chain, chain_cfg.input);
    chain->add_option("-k,--k,--order", chain_cfg.k, "Chain order k >= 2");
    chain->add_option("--tilde", chain_cfg.tilde,
                      "Ball reference profile: matched (same raster pipeline) or closed "
                      "(analytic ball autocorrelation)")
        ->check(CLI::IsMember({"matched", "closed"}));
    chain->add_option("--profile-in", chain_cfg.profile_path,
                      "Compute chain terms for a saved rearranged-autocorrelation profile "
                      "instead of a set");
    chain->add_flag("--assert-monotone", chain_cfg.assert_monotone,
                    "Exit with code 4 if the chain terms decrease beyond --slack");
    chain->add_option("--slack", chain_cfg.slack, "Monotonicity slack for --assert-monotone");
    chain->add_option("--budget", chain_cfg.budget, "Cost ceiling for norm evaluations");
    chain->add_flag("--pretty", chain_cfg.pretty, "Human-readable table instead of a JSON row");
    chain->add_option("-o,--out", chain_cfg.out_path, "Write the result row to a file");

    StabilityConfig stab_cfg;
    CLI::App* stab = app.add_subcommand(
        "stability",
        "Near-maximizer experiment: for randomly perturbed ellipsoids, measure "
        "the norm deficit delta = 1 - power/(gamma measure^{k+1}) against the "
        "symmetric-difference distance epsilon to the moment-fitted ellipsoid; "
        "writes records.jsonl and plot.tsv.");
    stab->add_option("-d,--d,--dim", stab_cfg.dim, "Dimension (1-3)");
    stab->add_option("-k,--k,--order", stab_cfg.k, "Norm order");
    stab->add_option("-n,--n,--cells", stab_cfg.n, "Cells per axis");
    stab->add_option("--extent", stab_cfg.extent, "Grid half-width");
    stab->add_option("--amplitudes", stab_cfg.amplitudes, "Perturbation amplitudes")
        ->delimiter(',');
    stab->add_option("--seeds", stab_cfg.seeds, "Explicit seed list")->delimiter(',');
    stab->add_option("--seed-count", stab_cfg.seed_count,
                     "Number of consecutive seeds when --seeds is absent");
    stab->add_option("--seed-base", stab_cfg.seed_base, "First seed when --seeds is absent");
    stab->add_flag("--refine", stab_cfg.refine,
                   "Locally refine each ellipsoid fit by coordinate descent on the "
                   "symmetric difference");
    stab->add_option("--budget", stab_cfg.budget, "Cost ceiling for norm evaluations");
    stab->add_option("--out-dir", stab_cfg.out_dir, "Existing directory for result files")
        ->required();
    stab->add_flag("--pretty", stab_cfg.pretty, "Human-readable summary instead of a JSON row");

    RearrangeConfig re_cfg;
    CLI::App* re = app.add_subcommand(
        "rearrange",
        "Rearrangement views of a set: its symmetric decreasing rearrangement "
        "raster (star.grid), the nonincreasing rearrangement f_* of its "
        "autocorrelation (f_star.profile), and the cumulative F(t) = integral "
        "of f_* up to t (F.profile), whose value maximizes integrals over "
        "measure-t sets (bathtub principle).");
    add_input_flags(re, re_cfg.input);
    re->add_option("--out-dir", re_cfg.out_dir, "Existing directory for the emitted files");
    re->add_flag("--bathtub-check", re_cfg.bathtub_check,
                 "Exit with code 4 unless the greedy bathtub maximizer matches the "
                 "cumulative of f_* to 1e-12 at seeded random levels");
    re->add_option("--check-seed", re_cfg.check_seed, "Seed for --bathtub-check levels");
    re->add_flag("--pretty", re_cfg.pretty, "Human-readable summary instead of a JSON row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (threads != 0) set_thread_count(threads);
        if (norm->parsed()) return cmd_norm(norm_cfg);
        if (chain->parsed()) return cmd_chain(chain_cfg);
        if (stab->parsed()) return cmd_stability(stab_cfg);
        if (re->parsed()) return cmd_rearrange(re_cfg);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << '\n';
        return 3;
    } catch (const AssertionError& e) {
        std::cerr << "assertion failed: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
