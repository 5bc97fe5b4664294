#include "cli.hpp"

#include "sspd/bench.hpp"
#include "sspd/cloud_io.hpp"
#include "sspd/cross_validation.hpp"
#include "sspd/error.hpp"
#include "sspd/gram.hpp"
#include "sspd/kernel_cache.hpp"
#include "sspd/mnist.hpp"
#include "sspd/spectral_kernels.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace sspd::cli {

namespace {

namespace fs = std::filesystem;

struct KernelFlags {
    std::vector<std::string> kinds{"series"};
    double t = 0.1;
    double eta = 0.01;
    std::string delta = "1";
    double sigma = 0.1;
    std::string base;
    int max_terms = 64;
    double tolerance = 1e-10;
    std::string estimator = "exact";
    int probes = 64;
    std::string det = "eigen";
    bool normalize = false;
};

struct Common {
    std::optional<std::uint64_t> seed;
    unsigned jobs = 0;
};

void add_kernel_flags(CLI::App* app, KernelFlags& f, bool many) {
    if (many)
        app->add_option("--kernel", f.kinds, "Kernels: tr, igv, series (comma separated)")
            ->delimiter(',')
            ->check(CLI::IsMember({"tr", "igv", "series"}))
            ->capture_default_str();
    else
        app->add_option_function<std::string>(
               "--kernel", [&f](const std::string& k) { f.kinds = {k}; }, "Kernel: tr, igv or series")
            ->check(CLI::IsMember({"tr", "igv", "series"}))
            ->default_str("series");
    app->add_option("--t", f.t, "Trace kernel temperature")->capture_default_str();
    app->add_option("--eta", f.eta, "IGV regularization")->capture_default_str();
    app->add_option("--delta", f.delta, "Series scale, a number or 'auto'")->capture_default_str();
    app->add_option("--sigma", f.sigma, "Gaussian base kernel bandwidth")->capture_default_str();
    app->add_option("--base", f.base, "Base kernel spec (gaussian:S, linear, poly:D:C); overrides --sigma");
    app->add_option("--max-terms", f.max_terms, "Series term cap")->capture_default_str();
    app->add_option("--tolerance", f.tolerance, "Series relative term tolerance")->capture_default_str();
    app->add_option("--estimator", f.estimator, "Series traces: exact or hutchinson")
        ->check(CLI::IsMember({"exact", "hutchinson"}))
        ->capture_default_str();
    app->add_option("--probes", f.probes, "Hutchinson probe vectors")->capture_default_str();
    app->add_option("--det", f.det, "IGV determinant: eigen or cholesky")
        ->check(CLI::IsMember({"eigen", "cholesky"}))
        ->capture_default_str();
    app->add_flag("--normalize", f.normalize, "Divide entries by sqrt(k_ii k_jj)");
}

void add_common_flags(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "Random seed (falls back to SPECMEASURE_SEED, then 0)");
    app->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)")->capture_default_str();
}

std::uint64_t resolve_seed(const Common& c) {
    if (c.seed) return *c.seed;
    if (const char* env = std::getenv("SPECMEASURE_SEED")) {
        std::uint64_t value = 0;
        const std::string_view text(env);
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw InvalidArgument(fmt::format("SPECMEASURE_SEED is not an unsigned integer: '{}'", text));
        return value;
    }
    return 0;
}

std::optional<double> parse_delta(const std::string& text) {
    if (text == "auto") return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument(fmt::format("--delta must be a number or 'auto', got '{}'", text));
    return value;
}

/// Resolves 'auto' delta against the dataset; validates the result.
KernelConfig make_config(const KernelFlags& f, const std::string& kind, std::span<const PointCloud> clouds,
                         std::uint64_t seed) {
    const BaseKernelSpec base = f.base.empty() ? BaseKernelSpec::gaussian(f.sigma) : BaseKernelSpec::parse(f.base);
    KernelConfig config;
    config.base = base;
    config.normalize = f.normalize;
    if (kind == "tr") {
        config.params = TraceKernelParams{f.t};
    } else if (kind == "igv") {
        config.params = IgvKernelParams{f.eta, f.det == "cholesky" ? DeterminantMethod::Cholesky : DeterminantMethod::Eigen};
    } else {
        SeriesKernelParams p;
        const auto delta = parse_delta(f.delta);
        p.delta = delta ? *delta : choose_delta(clouds, base);
        p.max_terms = f.max_terms;
        p.term_tolerance = f.tolerance;
        p.estimator = f.estimator == "hutchinson" ? TraceEstimator::Hutchinson : TraceEstimator::Exact;
        p.probes = f.probes;
        p.probe_seed = seed;
        config.params = p;
    }
    config.validate();
    return config;
}

std::string num(double v) { return fmt::format("{:#.12g}", v); }

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p)) {
                const auto ext = e.path().extension();
                if (e.is_regular_file() && (ext == ".json" || ext == ".csv")) found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(p);
        }
    }
    if (out.empty()) throw InvalidArgument("no input clouds");
    return out;
}

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream f(path, std::ios::binary);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw InvalidArgument(fmt::format("cannot write {}", path.string()));
}

std::string histogram_text(const std::map<int, std::size_t>& terms) {
    std::string out;
    for (const auto& [n, count] : terms) out += fmt::format("{}{}:{}", out.empty() ? "" : " ", n, count);
    return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semigroup spectral kernels between weighted point clouds", "sspd"};
    app.require_subcommand(1);

    // kernel
    KernelFlags kf;
    Common kc;
    std::string path_a, path_b;
    auto* kernel = app.add_subcommand("kernel", "Kernel value between two clouds");
    kernel->add_option("a", path_a, "First cloud (.json or .csv)")->required();
    kernel->add_option("b", path_b, "Second cloud (.json or .csv)")->required();
    add_kernel_flags(kernel, kf, false);
    add_common_flags(kernel, kc);

    // matrix
    KernelFlags mf;
    Common mc;
    std::vector<std::string> inputs;
    std::string prefix;
    bool check_psd = false;
    auto* matrix = app.add_subcommand("matrix", "Pairwise kernel matrix over clouds");
    matrix->add_option("inputs", inputs, "Cloud files or directories")->required();
    matrix->add_option("--out", prefix, "Output prefix: writes PREFIX.bin, PREFIX.json, PREFIX.csv")->required();
    matrix->add_flag("--check-psd", check_psd, "Report the minimum eigenvalue");
    add_kernel_flags(matrix, mf, false);
    add_common_flags(matrix, mc);

    // classify
    KernelFlags cf;
    Common cc;
    std::string images_path, labels_path, json_path;
    std::vector<int> samples{40, 60, 80};
    int per_class = 50;
    eval::CvOptions cv;
    double threshold = 0.5;
    std::string sampling = "uniform";
    auto* classify = app.add_subcommand("classify", "Cross-validated SVM classification of MNIST pixel clouds");
    classify->add_option("--images", images_path, "IDX image file")->required()->check(CLI::ExistingFile);
    classify->add_option("--labels", labels_path, "IDX label file")->required()->check(CLI::ExistingFile);
    classify->add_option("--samples", samples, "Pixels sampled per image (comma separated)")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    classify->add_option("--per-class", per_class, "Images per digit")->check(CLI::PositiveNumber)->capture_default_str();
    classify->add_option("--folds", cv.folds, "Cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
    classify->add_option("--repeats", cv.repeats, "Cross-validation repeats")->check(CLI::PositiveNumber)->capture_default_str();
    classify->add_option("--C", cv.c, "SVM regularization")->check(CLI::PositiveNumber)->capture_default_str();
    classify->add_option("--threshold", threshold, "Ink threshold in [0, 1)")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
    classify->add_option("--sampling", sampling, "Pixel sampling law: uniform or intensity")
        ->check(CLI::IsMember({"uniform", "intensity"}))
        ->capture_default_str();
    classify->add_option("--json", json_path, "Write the full reports as JSON");
    add_kernel_flags(classify, cf, true);
    add_common_flags(classify, cc);

    // delta-bound
    std::optional<int> bound_d;
    std::optional<double> bound_omega;
    std::vector<std::string> bound_clouds;
    auto* bound = app.add_subcommand("delta-bound", "Largest admissible series scale for Gaussian clouds");
    auto* d_opt = bound->add_option("--d", bound_d, "Joint point count d''");
    auto* w_opt = bound->add_option("--omega", bound_omega, "Largest mixture weight");
    auto* c_opt = bound->add_option("--clouds", bound_clouds, "Derive d'' and omega from these clouds");
    d_opt->needs(w_opt);
    w_opt->needs(d_opt);
    c_opt->excludes(d_opt)->excludes(w_opt);

    // bench
    std::vector<int> sizes{64, 128, 256};
    int trials = 5;
    Common bc;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "Series vs eigendecomposition timing");
    bench->add_option("--sizes", sizes, "Joint sizes d'' (comma separated)")->delimiter(',')->check(CLI::Range(8, 1 << 20))->capture_default_str();
    bench->add_option("--trials", trials, "Random instances per size")->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--out", bench_out, "Also write the CSV here");
    add_common_flags(bench, bc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (kernel->parsed()) {
            const std::uint64_t seed = resolve_seed(kc);
            const PointCloud a = read_cloud(path_a);
            const PointCloud b = read_cloud(path_b);
            const std::vector<PointCloud> both{a, b};
            const KernelConfig config = make_config(kf, kf.kinds.front(), both, seed);
            double value = evaluate(a, b, config);
            if (config.normalize) value /= std::sqrt(evaluate(a, a, config) * evaluate(b, b, config));
            out << num(value) << '\n';
        } else if (matrix->parsed()) {
            const std::uint64_t seed = resolve_seed(mc);
            std::vector<PointCloud> clouds;
            for (const auto& p : expand_inputs(inputs)) clouds.push_back(read_cloud(p));
            const KernelConfig config = make_config(mf, mf.kinds.front(), clouds, seed);
            KernelMatrixOptions opts;
            opts.jobs = mc.jobs;
            KernelMatrixStats stats;
            const Eigen::MatrixXd k = kernel_matrix(clouds, config, opts, &stats);
            write_kernel_cache(prefix + ".bin", k, config.kind());
            write_file(prefix + ".json", kernel_cache_sidecar(config, clouds).dump(2) + "\n");
            write_file(prefix + ".csv", matrix_to_csv(k));
            out << fmt::format("wrote {0}.bin {0}.json {0}.csv ({1}x{1})\n", prefix, k.rows());
            if (!stats.series_terms.empty()) out << "series terms: " << histogram_text(stats.series_terms) << '\n';
            if (check_psd) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
                out << "min eigenvalue: " << num(es.eigenvalues().minCoeff()) << '\n';
            }
        } else if (classify->parsed()) {
            cv.seed = resolve_seed(cc);
            cv.jobs = cc.jobs;
            const auto images = eval::take_per_class(eval::load_mnist_idx(images_path, labels_path), per_class);
            std::vector<eval::TableCell> cells;
            nlohmann::json reports = nlohmann::json::array();
            for (int m : samples) {
                const auto dataset = eval::pixel_clouds(images, m, threshold, cv.seed,
                                                     sampling == "intensity" ? eval::SamplingLaw::Intensity
                                                                             : eval::SamplingLaw::Uniform);
                std::vector<PointCloud> clouds;
                for (const auto& item : dataset) clouds.push_back(item.cloud);
                for (const auto& kind : cf.kinds) {
                    const KernelConfig config = make_config(cf, kind, clouds, cv.seed);
                    const auto report = eval::cross_validate(dataset, config, cv);
                    cells.push_back({m, config.label(), report.mean, report.stddev});
                    auto j = eval::to_json(report);
                    j["samples"] = m;
                    j["images"] = dataset.size();
                    j["sampling"] = sampling;
                    reports.push_back(std::move(j));
                    err << fmt::format("samples={} {}: {:.2f}% ({:.1f}s)", m, config.label(), report.mean, report.seconds);
                    if (!report.stats.series_terms.empty())
                        err << " terms " << histogram_text(report.stats.series_terms);
                    err << '\n';
                }
            }
            out << eval::format_table(cells);
            if (!json_path.empty()) write_file(json_path, reports.dump(2) + "\n");
        } else if (bound->parsed()) {
            if (!bound_clouds.empty()) {
                std::vector<PointCloud> clouds;
                for (const auto& p : expand_inputs(bound_clouds)) clouds.push_back(read_cloud(p));
                Eigen::Index size = 0;
                double omega = 0.0;
                for (const auto& c : clouds) {
                    size = std::max(size, c.size());
                    omega = std::max(omega, c.max_weight());
                }
                out << num(delta_bound(static_cast<int>(2 * size), 0.5 * omega)) << '\n';
            } else if (bound_d && bound_omega) {
                out << num(delta_bound(*bound_d, *bound_omega)) << '\n';
            } else {
                err << "delta-bound: give --d and --omega, or --clouds\n" << bound->help();
                return kExitUsage;
            }
        } else if (bench->parsed()) {
            const auto result = eval::bench_series_vs_eigen(sizes, trials, resolve_seed(bc));
            const auto csv = eval::bench_csv(result);
            out << csv;
            if (!bench_out.empty()) write_file(bench_out, csv);
            err << "max |series - eigen| = " << num(result.max_abs_diff) << '\n';
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.category() == ErrorCategory::Input ? kExitUsage : kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace sspd::cli
