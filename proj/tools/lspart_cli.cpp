// lspart command-line interface: CSV in, JSON (and plot CSV) out.
#include "csv.hpp"

#include "lspart/lspart.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace {

using lspart::cli::CsvTable;
using lspart::cli::InputFailure;
using nlohmann::ordered_json;

constexpr int exit_input = 2;
constexpr int exit_numeric = 3;

/// Failure reported by the library; carries its status code.
class LibraryFailure : public std::runtime_error {
public:
    LibraryFailure(lspart_status status, const std::string& what) : std::runtime_error(what), status(status) {}
    lspart_status status;
};

void check(lspart_status status) {
    if (status != LSPART_OK) throw LibraryFailure(status, lspart_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using SamplePtr = std::unique_ptr<lspart_sample, Deleter<lspart_sample, lspart_sample_free>>;
using ResultPtr = std::unique_ptr<lspart_result, Deleter<lspart_result, lspart_result_free>>;
using TuningPtr = std::unique_ptr<lspart_tuning, Deleter<lspart_tuning, lspart_tuning_free>>;
using CoveragePtr = std::unique_ptr<lspart_coverage, Deleter<lspart_coverage, lspart_coverage_free>>;

struct RunConfig {
    std::string input;
    std::string y_col;
    std::vector<std::string> x_cols;
    std::string group_col;
    std::string weights;
    bool shared_kappa = false;
    std::string method = "bs";
    int m = 2;
    int m_bc = 3;
    std::vector<int> deriv;
    std::vector<int> kappa;
    std::string kselect = "dpi";
    std::string ktype = "uniform";
    int bc = 3;
    std::optional<int> hc;
    double alpha = 0.05;
    std::string band = "on";
    int nsim = 2000;
    std::uint64_t seed = 0;
    std::string grid;
    std::string out;
    std::string plot;
    // simulate
    std::string dgp;
    std::size_t n = 1000;
    std::size_t reps = 500;
};

void add_model_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--method", c.method, "Basis family: bs (B-splines) or pp (piecewise polynomials)")
        ->check(CLI::IsMember({"bs", "pp"}));
    cmd->add_option("--m", c.m, "Basis order (degree + 1)");
    cmd->add_option("--m-bc", c.m_bc, "Order of the bias-correction basis");
    cmd->add_option("--deriv", c.deriv, "Derivative order per covariate")->delimiter(',');
    cmd->add_option("--kappa", c.kappa, "Subintervals per covariate (skips selection)")->delimiter(',');
    cmd->add_option("--kselect", c.kselect, "Kappa selector: rot or dpi")->check(CLI::IsMember({"rot", "dpi"}));
    cmd->add_option("--ktype", c.ktype, "Knot spacing: uniform or quantile")
        ->check(CLI::IsMember({"uniform", "quantile"}));
}

void add_inference_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--bc", c.bc, "Bias correction: 0 none, 1 higher-order, 2 least squares, 3 plug-in")
        ->check(CLI::Range(0, 3));
    cmd->add_option("--hc", c.hc, "Heteroskedasticity-consistent weights 0..3 (default hc0 for j=0, hc3 otherwise)")
        ->check(CLI::Range(0, 3));
    cmd->add_option("--alpha", c.alpha, "Significance level");
    cmd->add_option("--band", c.band, "Uniform confidence band: on or off")->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--nsim", c.nsim, "Simulation draws for the band critical value");
    cmd->add_option("--seed", c.seed, "Seed for all simulation randomness");
}

void add_data_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--input", c.input, "Input CSV with a header row")->required();
    cmd->add_option("--y", c.y_col, "Response column")->required();
    cmd->add_option("--x", c.x_cols, "Covariate column(s)")->required()->delimiter(',');
}

lspart_options make_options(const RunConfig& c, std::size_t dims) {
    lspart_options o;
    lspart_options_init(&o);
    o.family = c.method == "bs" ? LSPART_BSPLINE : LSPART_PIECEWISE_POLY;
    o.m = c.m;
    o.m_bc = c.m_bc;
    if (!c.deriv.empty()) {
        if (c.deriv.size() != dims) throw InputFailure("--deriv needs one entry per covariate");
        o.deriv = c.deriv.data();
    }
    if (!c.kappa.empty()) {
        o.kappa = c.kappa.data();
        o.kappa_len = c.kappa.size();
    }
    o.selector = c.kselect == "rot" ? LSPART_SELECT_ROT : LSPART_SELECT_DPI;
    o.spacing = c.ktype == "uniform" ? LSPART_SPACING_UNIFORM : LSPART_SPACING_QUANTILE;
    o.bc = c.bc;
    o.hc = c.hc ? *c.hc : LSPART_HC_DEFAULT;
    o.alpha = c.alpha;
    o.band = c.band == "on";
    o.nsim = c.nsim;
    o.seed = c.seed;
    o.shared_kappa = c.shared_kappa;
    return o;
}

ordered_json config_json(const RunConfig& c) {
    ordered_json j;
    j["method"] = c.method;
    j["m"] = c.m;
    j["m_bc"] = c.m_bc;
    j["deriv"] = c.deriv;
    j["kappa"] = c.kappa;
    j["kselect"] = c.kselect;
    j["ktype"] = c.ktype;
    j["bc"] = c.bc;
    j["hc"] = c.hc ? ordered_json(*c.hc) : ordered_json("default");
    j["alpha"] = c.alpha;
    j["band"] = c.band == "on";
    j["nsim"] = c.nsim;
    j["seed"] = c.seed;
    return j;
}

/// Rows of the CSV restricted to numeric y and x columns.
struct Data {
    std::vector<double> y;
    std::vector<double> x;  // row-major
    std::size_t n = 0;
    std::size_t d = 0;
};

Data extract(const CsvTable& table, const std::string& y_col, const std::vector<std::string>& x_cols,
             const std::vector<std::size_t>* rows = nullptr) {
    Data data;
    const auto y = table.numeric(y_col);
    std::vector<std::vector<double>> xs;
    for (const auto& name : x_cols) xs.push_back(table.numeric(name));
    data.d = x_cols.size();
    auto take = [&](std::size_t r) {
        data.y.push_back(y[r]);
        for (const auto& col : xs) data.x.push_back(col[r]);
    };
    if (rows) {
        for (std::size_t r : *rows) take(r);
    } else {
        for (std::size_t r = 0; r < table.rows(); ++r) take(r);
    }
    data.n = data.y.size();
    if (data.n == 0) throw InputFailure("input has no data rows");
    return data;
}

SamplePtr make_sample(const Data& d) {
    lspart_sample* s = nullptr;
    check(lspart_sample_create(d.y.data(), d.x.data(), d.n, d.d, &s));
    return SamplePtr(s);
}

/// Explicit grid from a CSV file holding the covariate columns, or nothing
/// when the --grid value is a point count for the default grid.
struct GridChoice {
    std::vector<double> points;  // row-major, empty for the default grid
    std::size_t count = 0;
    int per_dim = 50;
};

GridChoice parse_grid(const std::string& spec, const std::vector<std::string>& x_cols) {
    GridChoice g;
    if (spec.empty()) return g;
    std::string s = spec;
    for (const char* prefix : {"quantile:", "common:"}) {
        if (s.rfind(prefix, 0) == 0) s = s.substr(std::string(prefix).size());
    }
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
        g.per_dim = std::stoi(s);
        if (g.per_dim < 1) throw InputFailure("--grid needs a positive point count");
        return g;
    }
    const CsvTable table = CsvTable::read(s);
    std::vector<std::vector<double>> cols;
    for (const auto& name : x_cols) cols.push_back(table.numeric(name));
    for (std::size_t r = 0; r < table.rows(); ++r)
        for (const auto& col : cols) g.points.push_back(col[r]);
    g.count = table.rows();
    if (g.count == 0) throw InputFailure("grid file has no rows");
    return g;
}

ordered_json tuning_json(const lspart_tuning* t) {
    if (t == nullptr) return nullptr;
    ordered_json j;
    j["kappa_rot"] = lspart_tuning_kappa_rot(t);
    j["kappa_dpi"] = lspart_tuning_has_dpi(t) ? ordered_json(lspart_tuning_kappa_dpi(t)) : ordered_json(nullptr);
    j["bias_constant"] = lspart_tuning_bias_constant(t);
    j["variance_constant"] = lspart_tuning_variance_constant(t);
    j["rot_bias_constant"] = lspart_tuning_rot_bias_constant(t);
    j["rot_variance_constant"] = lspart_tuning_rot_variance_constant(t);
    j["rate_exponent"] = lspart_tuning_rate_exponent(t);
    j["kappa_cap"] = lspart_tuning_kappa_cap(t);
    j["fallback"] = lspart_tuning_fallback(t) != 0;
    ordered_json w = ordered_json::array();
    for (std::size_t i = 0; i < lspart_tuning_num_warnings(t); ++i) w.push_back(lspart_tuning_warning(t, i));
    j["warnings"] = w;
    return j;
}

ordered_json group_json(const lspart_result* r, std::size_t g, std::size_t dims) {
    ordered_json j;
    j["n"] = lspart_result_group_n(r, g);
    std::vector<int> kappa;
    for (std::size_t l = 0; l < dims; ++l) kappa.push_back(lspart_result_group_kappa(r, g, l));
    j["kappa"] = kappa;
    j["K"] = lspart_result_group_basis_dim(r, g);
    j["K_bc"] = lspart_result_group_aux_basis_dim(r, g);
    j["effective_rank"] = lspart_result_group_effective_rank(r, g);
    j["selector"] = tuning_json(lspart_result_group_tuning(r, g));
    return j;
}

ordered_json results_json(const lspart_result* r) {
    const std::size_t points = lspart_result_num_points(r);
    const std::size_t dims = lspart_result_dims(r);
    const bool band = lspart_result_has_band(r) != 0;
    ordered_json out = ordered_json::array();
    for (std::size_t k = 0; k < lspart_result_num_corrections(r); ++k) {
        ordered_json jr;
        jr["j"] = lspart_result_correction(r, k);
        jr["hc"] = lspart_result_hc(r, k);
        jr["critical_value"] = band ? ordered_json(lspart_result_critical_value(r, k)) : ordered_json(nullptr);
        ordered_json pts = ordered_json::array();
        for (std::size_t i = 0; i < points; ++i) {
            const double* x = lspart_result_point(r, i);
            ordered_json p;
            p["x"] = std::vector<double>(x, x + dims);
            p["estimate"] = lspart_result_estimate(r, k)[i];
            p["se"] = lspart_result_se(r, k)[i];
            p["ci"] = {lspart_result_ci_lo(r, k)[i], lspart_result_ci_hi(r, k)[i]};
            p["band"] = band ? ordered_json({lspart_result_band_lo(r, k)[i], lspart_result_band_hi(r, k)[i]})
                             : ordered_json(nullptr);
            pts.push_back(p);
        }
        jr["points"] = pts;
        out.push_back(jr);
    }
    return out;
}

ordered_json warnings_json(const lspart_result* r) {
    ordered_json w = ordered_json::array();
    for (std::size_t i = 0; i < lspart_result_num_warnings(r); ++i) w.push_back(lspart_result_warning(r, i));
    return w;
}

/// Long-format plot data: j, x columns, estimate, se, ci_lo, ci_hi, band_lo, band_hi.
std::string plot_csv(const lspart_result* r, const std::vector<std::string>& x_cols) {
    using lspart::cli::format_double;
    std::ostringstream os;
    os << "j";
    for (const auto& name : x_cols) os << ',' << name;
    os << ",estimate,se,ci_lo,ci_hi,band_lo,band_hi\n";
    const bool band = lspart_result_has_band(r) != 0;
    for (std::size_t k = 0; k < lspart_result_num_corrections(r); ++k) {
        for (std::size_t i = 0; i < lspart_result_num_points(r); ++i) {
            os << lspart_result_correction(r, k);
            const double* x = lspart_result_point(r, i);
            for (std::size_t l = 0; l < x_cols.size(); ++l) os << ',' << format_double(x[l]);
            os << ',' << format_double(lspart_result_estimate(r, k)[i]) << ','
               << format_double(lspart_result_se(r, k)[i]) << ',' << format_double(lspart_result_ci_lo(r, k)[i])
               << ',' << format_double(lspart_result_ci_hi(r, k)[i]) << ',';
            if (band) {
                os << format_double(lspart_result_band_lo(r, k)[i]) << ','
                   << format_double(lspart_result_band_hi(r, k)[i]);
            } else {
                os << ',';
            }
            os << '\n';
        }
    }
    return os.str();
}

void emit(const ordered_json& j, const std::string& path) {
    const std::string text = j.dump(2) + "\n";
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        lspart::cli::write_atomic(path, text);
    }
}

int cmd_fit(const RunConfig& c) {
    const CsvTable table = CsvTable::read(c.input);
    const Data data = extract(table, c.y_col, c.x_cols);
    const SamplePtr sample = make_sample(data);
    lspart_options o = make_options(c, data.d);
    const GridChoice grid = parse_grid(c.grid, c.x_cols);
    o.grid_points = grid.per_dim;
    lspart_result* raw = nullptr;
    check(lspart_fit(sample.get(), &o, grid.points.empty() ? nullptr : grid.points.data(), grid.count, &raw));
    const ResultPtr result(raw);

    ordered_json j;
    j["schema"] = "lspart/1";
    j["command"] = "fit";
    j["n"] = data.n;
    j["d"] = data.d;
    j["y"] = c.y_col;
    j["x"] = c.x_cols;
    j["config"] = config_json(c);
    const ordered_json g = group_json(result.get(), 0, data.d);
    j["kappa"] = g["kappa"];
    j["K"] = g["K"];
    j["K_bc"] = g["K_bc"];
    j["effective_rank"] = g["effective_rank"];
    j["selector"] = g["selector"];
    j["results"] = results_json(result.get());
    j["warnings"] = warnings_json(result.get());
    if (!c.plot.empty()) lspart::cli::write_atomic(c.plot, plot_csv(result.get(), c.x_cols));
    emit(j, c.out);
    return 0;
}

int cmd_select(const RunConfig& c) {
    const CsvTable table = CsvTable::read(c.input);
    const Data data = extract(table, c.y_col, c.x_cols);
    const SamplePtr sample = make_sample(data);
    const lspart_options o = make_options(c, data.d);
    lspart_tuning* raw = nullptr;
    check(lspart_select(sample.get(), &o, &raw));
    const TuningPtr tuning(raw);

    ordered_json j;
    j["schema"] = "lspart/1";
    j["command"] = "select";
    j["n"] = data.n;
    j["d"] = data.d;
    j["config"] = config_json(c);
    j["kappa"] = lspart_tuning_kappa(tuning.get());
    j["selector"] = tuning_json(tuning.get());
    emit(j, c.out);
    return 0;
}

std::vector<double> parse_weights(const std::string& text, const std::vector<std::string>& labels) {
    if (text.empty()) throw InputFailure("--weights is required for lincom");
    const auto parts = lspart::cli::split(text, ',');
    auto number = [](const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size()) throw InputFailure("invalid weight '" + s + "'");
        return v;
    };
    std::vector<double> w(labels.size(), 0.0);
    if (parts.front().find(':') != std::string::npos) {
        for (const auto& p : parts) {
            const auto pos = p.rfind(':');
            if (pos == std::string::npos) throw InputFailure("mix of labelled and positional weights");
            const std::string label = p.substr(0, pos);
            const auto it = std::find(labels.begin(), labels.end(), label);
            if (it == labels.end()) throw InputFailure("weight for unknown group '" + label + "'");
            w[static_cast<std::size_t>(it - labels.begin())] = number(p.substr(pos + 1));
        }
    } else {
        if (parts.size() != labels.size()) {
            std::ostringstream os;
            os << "--weights lists " << parts.size() << " values for " << labels.size() << " groups";
            throw InputFailure(os.str());
        }
        for (std::size_t g = 0; g < parts.size(); ++g) w[g] = number(parts[g]);
    }
    return w;
}

int cmd_lincom(const RunConfig& c) {
    if (c.group_col.empty()) throw InputFailure("--group-col is required for lincom");
    const CsvTable table = CsvTable::read(c.input);
    const std::size_t gcol = table.column(c.group_col);
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const std::string& label = table.cell(r, gcol);
        if (label.empty() || label == "NA") {
            std::ostringstream os;
            os << c.input << ": row " << r + 1 << ", column '" << c.group_col << "': missing value";
            throw InputFailure(os.str());
        }
        members[label].push_back(r);
    }
    std::vector<std::string> labels;
    for (const auto& [label, rows] : members) labels.push_back(label);
    const std::vector<double> weights = parse_weights(c.weights, labels);

    std::vector<SamplePtr> samples;
    std::vector<const lspart_sample*> handles;
    std::size_t d = c.x_cols.size();
    for (const auto& label : labels) {
        samples.push_back(make_sample(extract(table, c.y_col, c.x_cols, &members[label])));
        handles.push_back(samples.back().get());
    }
    lspart_options o = make_options(c, d);
    const GridChoice grid = parse_grid(c.grid, c.x_cols);
    o.grid_points = grid.per_dim;
    lspart_result* raw = nullptr;
    check(lspart_lincom(handles.data(), weights.data(), handles.size(), &o,
                        grid.points.empty() ? nullptr : grid.points.data(), grid.count, &raw));
    const ResultPtr result(raw);

    ordered_json j;
    j["schema"] = "lspart/1";
    j["command"] = "lincom";
    j["d"] = d;
    j["y"] = c.y_col;
    j["x"] = c.x_cols;
    j["config"] = config_json(c);
    j["shared_kappa"] = c.shared_kappa;
    ordered_json groups = ordered_json::array();
    for (std::size_t g = 0; g < labels.size(); ++g) {
        ordered_json gj;
        gj["label"] = labels[g];
        gj["weight"] = weights[g];
        gj.update(group_json(result.get(), g, d));
        groups.push_back(gj);
    }
    j["groups"] = groups;
    j["results"] = results_json(result.get());
    j["warnings"] = warnings_json(result.get());
    if (!c.plot.empty()) lspart::cli::write_atomic(c.plot, plot_csv(result.get(), c.x_cols));
    emit(j, c.out);
    return 0;
}

int cmd_simulate(const RunConfig& c) {
    if (c.reps < 1) throw InputFailure("--reps must be at least 1");
    int dims = 0;
    for (std::size_t i = 0; i < lspart_dgp_count(); ++i)
        if (c.dgp == lspart_dgp_id(i)) dims = lspart_dgp_dims(i);
    if (dims == 0) {
        std::string known;
        for (std::size_t i = 0; i < lspart_dgp_count(); ++i) known += std::string(i ? ", " : "") + lspart_dgp_id(i);
        throw InputFailure("unknown DGP id '" + c.dgp + "' (known: " + known + ")");
    }
    lspart_options o = make_options(c, static_cast<std::size_t>(dims));
    o.grid_points = 0;
    if (!c.grid.empty()) o.grid_points = parse_grid(c.grid, {}).per_dim;
    lspart_coverage* raw = nullptr;
    check(lspart_simulate(c.dgp.c_str(), c.n, c.reps, &o, &raw));
    const CoveragePtr cov(raw);

    ordered_json j;
    j["schema"] = "lspart/1";
    j["command"] = "simulate";
    j["dgp"] = c.dgp;
    j["n"] = c.n;
    j["reps"] = c.reps;
    j["config"] = config_json(c);
    j["grid_points"] = lspart_coverage_num_points(cov.get());
    const double* med = lspart_coverage_median_point(cov.get());
    j["median_point"] = std::vector<double>(med, med + dims);
    j["mean_kappa"] = lspart_coverage_mean_kappa(cov.get());
    const bool band = lspart_coverage_has_band(cov.get()) != 0;
    ordered_json rows = ordered_json::array();
    for (std::size_t k = 0; k < lspart_coverage_num_rows(cov.get()); ++k) {
        ordered_json r;
        r["j"] = lspart_coverage_correction(cov.get(), k);
        r["hc"] = lspart_coverage_hc(cov.get(), k);
        r["pointwise_coverage"] = lspart_coverage_pointwise(cov.get(), k);
        r["median_point_coverage"] = lspart_coverage_median(cov.get(), k);
        r["band_coverage"] = band ? ordered_json(lspart_coverage_band(cov.get(), k)) : ordered_json(nullptr);
        r["ci_width"] = lspart_coverage_ci_width(cov.get(), k);
        r["band_width"] = band ? ordered_json(lspart_coverage_band_width(cov.get(), k)) : ordered_json(nullptr);
        rows.push_back(r);
    }
    j["coverage"] = rows;
    emit(j, c.out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partitioning-based least squares regression with robust bias-corrected inference"};
    app.require_subcommand(1);
    RunConfig c;

    auto* fit = app.add_subcommand("fit", "Estimate on a grid with pointwise intervals and uniform bands");
    add_data_flags(fit, c);
    add_model_flags(fit, c);
    add_inference_flags(fit, c);
    fit->add_option("--grid", c.grid, "Points per dimension (default 50 sample quantiles) or a CSV of grid points");
    fit->add_option("--out", c.out, "JSON output path (stdout when omitted)");
    fit->add_option("--plot", c.plot, "Plot-data CSV output path");

    auto* select = app.add_subcommand("select", "Report IMSE-optimal kappa from the ROT and DPI selectors");
    add_data_flags(select, c);
    add_model_flags(select, c);
    select->add_option("--out", c.out, "JSON output path (stdout when omitted)");

    auto* lincom = app.add_subcommand("lincom", "Linear combination of group regression functions");
    add_data_flags(lincom, c);
    add_model_flags(lincom, c);
    add_inference_flags(lincom, c);
    lincom->add_option("--group-col", c.group_col, "Column whose values define the groups")->required();
    lincom->add_option("--weights", c.weights,
                       "Weights in sorted group-label order (1,-1) or as label:weight pairs")
        ->required();
    lincom->add_flag("--shared-kappa", c.shared_kappa, "Select one kappa on the pooled sample");
    lincom->add_option("--grid", c.grid, "Points per dimension over the common support or a CSV of grid points");
    lincom->add_option("--out", c.out, "JSON output path (stdout when omitted)");
    lincom->add_option("--plot", c.plot, "Plot-data CSV output path");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo coverage of intervals and bands on a built-in DGP");
    simulate->add_option("--dgp", c.dgp, "DGP id (zero, line, sinbump, wave2d)")->required();
    simulate->add_option("--n", c.n, "Sample size per replication");
    simulate->add_option("--reps", c.reps, "Replications");
    add_model_flags(simulate, c);
    add_inference_flags(simulate, c);
    simulate->add_option("--grid", c.grid, "Evaluation points per dimension");
    simulate->add_option("--out", c.out, "JSON output path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_input;
    }

    try {
        if (*fit) return cmd_fit(c);
        if (*select) return cmd_select(c);
        if (*lincom) return cmd_lincom(c);
        return cmd_simulate(c);
    } catch (const InputFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const LibraryFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.status == LSPART_ERR_INPUT ? exit_input : exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
}
