// willis2d: command-line front end for the lattice simulator/homogenizer.
//
// Subcommands: tensors | homogenize | dispersion | resonator | perturb |
// validate, each driven by a single JSON configuration (see
// willis/config.hpp for the schema).  All outputs are deterministic for a
// fixed configuration: reruns produce byte-identical files.
//
// Exit codes: 0 success, 1 numerical failure, 2 configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "willis/cell.hpp"
#include "willis/config.hpp"
#include "willis/dispersion.hpp"
#include "willis/harmonic.hpp"
#include "willis/homogenize.hpp"
#include "willis/resonator.hpp"

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;
using namespace willis;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

njson finite_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

template <typename Derived>
njson matrix_json(const Eigen::MatrixBase<Derived>& matrix) {
    const Eigen::MatrixXcd m = matrix.template cast<cplx>();
    njson re = njson::array(), im = njson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        njson row_re = njson::array(), row_im = njson::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row_re.push_back(m(r, c).real());
            row_im.push_back(m(r, c).imag());
        }
        re.push_back(row_re);
        im.push_back(row_im);
    }
    return njson{{"re", re}, {"im", im}};
}

njson real_grid_json(const Eigen::Matrix<double, 6, 6>& m) {
    njson rows = njson::array();
    for (int r = 0; r < 6; ++r) {
        njson row = njson::array();
        for (int c = 0; c < 6; ++c) row.push_back(finite_or_null(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

njson law_json(const EffectiveLaw& law) {
    return njson{{"C", matrix_json(law.C)},
                 {"S", matrix_json(law.S)},
                 {"D", matrix_json(law.D)},
                 {"rho", matrix_json(law.rho)}};
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

fs::path prepare_output_dir(const ExperimentConfig& cfg) {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    return dir;
}

/// Label of entry (r, c) of the 6x6 block law: C, S, D or rho with 1-based
/// block-local indices.
std::string entry_name(int r, int c) {
    const bool top = r < 4, left = c < 4;
    if (top && left) return "C" + std::to_string(r + 1) + std::to_string(c + 1);
    if (top) return "S" + std::to_string(r + 1) + std::to_string(c - 3);
    if (left) return "D" + std::to_string(r - 3) + std::to_string(c + 1);
    return "rho" + std::to_string(r - 3) + std::to_string(c - 3);
}

int cmd_tensors(const ExperimentConfig& cfg) {
    const double omega = cfg.omega.scalar();
    const Mat4c network = spring_network_elasticity(cfg.cell).cast<cplx>();
    const EffectiveLaw law = effective_law(cfg.cell, omega, network);
    const CouplingTensors ct = coupling_tensors(cfg.cell, omega);
    const PrimedTensors pt = primed_tensors(ct.S, ct.D, omega);

    njson out{{"omega", omega},
              {"cell", to_json(cfg).at("cell")},
              {"C", matrix_json(law.C)},
              {"S", matrix_json(law.S)},
              {"D", matrix_json(law.D)},
              {"rho", matrix_json(law.rho)},
              {"S_prime", matrix_json(pt.S_prime)},
              {"D_prime", matrix_json(pt.D_prime)}};
    write_text(prepare_output_dir(cfg) / "tensors.json", out.dump(2) + "\n");
    return 0;
}

int cmd_homogenize(const ExperimentConfig& cfg) {
    if (cfg.h_list.size() < 3)
        throw ConfigError("h_list", "a convergence study needs at least 3 spacings");
    const double omega = cfg.omega.scalar();
    const ConvergenceReport report =
        extract_effective_law(cfg.cell, omega, cfg.h_list, cfg.nx, cfg.ny, cfg.threads);

    njson measured = njson::array();
    for (std::size_t i = 0; i < report.h_values.size(); ++i) {
        njson one = law_json(report.measured[i]);
        one["h"] = report.h_values[i];
        measured.push_back(one);
    }
    njson out{{"omega", omega},
              {"h_list", report.h_values},
              {"monotone", report.monotone},
              {"at_floor", report.at_floor},
              {"rate", finite_or_null(report.rate)},
              {"reference", law_json(report.reference)},
              {"extrapolated", law_json(report.extrapolated)},
              {"measured", measured},
              {"abs_err", real_grid_json(report.abs_err)},
              {"rel_err", real_grid_json(report.rel_err)},
              {"entry_rates", real_grid_json(report.entry_rates)}};
    const fs::path dir = prepare_output_dir(cfg);
    write_text(dir / "convergence.json", out.dump(2) + "\n");

    std::string csv = "h,entry,abs_err,rel_err\n";
    const Mat6c reference = block_matrix(report.reference);
    for (std::size_t i = 0; i < report.h_values.size(); ++i) {
        const Mat6c measured_block = block_matrix(report.measured[i]);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) {
                const double abs_err = std::abs(measured_block(r, c) - reference(r, c));
                const double ref_mag = std::abs(reference(r, c));
                csv += fmt(report.h_values[i]) + "," + entry_name(r, c) + "," +
                       fmt(abs_err) + "," +
                       (ref_mag > 0.0 ? fmt(abs_err / ref_mag) : "nan") + "\n";
            }
    }
    write_text(dir / "convergence.csv", csv);

    if (!report.at_floor && !(report.monotone && report.rate > 0.0))
        throw std::runtime_error(
            "homogenization did not converge over the requested h_list "
            "(difference norms are not monotone); see convergence.json");
    return 0;
}

int cmd_dispersion(const ExperimentConfig& cfg) {
    if (cfg.k_path.empty()) throw ConfigError("k_path", "must be non-empty");
    for (const auto& k : cfg.k_path) {
        const double kh = k.norm() * cfg.cell.h;
        if (kh > 0.1)
            std::fprintf(stderr,
                         "warning: |k| h = %.4f exceeds 0.1 at k = (%g, %g); the "
                         "effective-medium comparison is outside its validity range\n",
                         kh, k.x(), k.y());
    }

    const std::vector<BranchMismatch> rows = long_wavelength_compare(cfg.cell, cfg.k_path);
    const std::size_t branches = rows.size() / cfg.k_path.size();

    // Branch labels follow the discrete eigenvectors by continuity along the
    // path (largest overlap with the previous point's modes).
    const Lattice cell = build_periodic_cell(cfg.cell);
    std::vector<std::vector<int>> labels(cfg.k_path.size());
    std::vector<Eigen::VectorXcd> prev_modes;
    std::vector<int> prev_labels;
    for (std::size_t t = 0; t < cfg.k_path.size(); ++t) {
        const auto bands = bloch_bands(cell, cfg.k_path[t]);
        std::vector<int> lab(bands.size());
        if (prev_modes.empty() || bands.size() != prev_modes.size()) {
            for (std::size_t b = 0; b < bands.size(); ++b) lab[b] = static_cast<int>(b);
        } else {
            // Two branches: keep or swap, whichever preserves mode overlap.
            const double keep = std::abs(prev_modes[0].dot(bands[0].mode)) +
                                std::abs(prev_modes[1].dot(bands[1].mode));
            const double swap = std::abs(prev_modes[0].dot(bands[1].mode)) +
                                std::abs(prev_modes[1].dot(bands[0].mode));
            if (swap > keep) {
                lab[0] = prev_labels[1];
                lab[1] = prev_labels[0];
            } else {
                lab[0] = prev_labels[0];
                lab[1] = prev_labels[1];
            }
        }
        labels[t] = lab;
        prev_modes.clear();
        for (const auto& band : bands) prev_modes.push_back(band.mode.normalized());
        prev_labels = lab;
    }

    std::string csv =
        "k1,k2,branch,re_omega,im_omega,re_effective,im_effective,mismatch\n";
    for (std::size_t t = 0; t < cfg.k_path.size(); ++t) {
        // Emit in label order for a stable CSV layout.
        for (std::size_t want = 0; want < branches; ++want)
            for (std::size_t b = 0; b < branches; ++b) {
                if (static_cast<std::size_t>(labels[t][b]) != want) continue;
                const BranchMismatch& row = rows[t * branches + b];
                csv += fmt(row.k.x()) + "," + fmt(row.k.y()) + "," +
                       std::to_string(want) + "," + fmt(row.discrete_omega.real()) +
                       "," + fmt(row.discrete_omega.imag()) + "," +
                       fmt(row.effective_omega.real()) + "," +
                       fmt(row.effective_omega.imag()) + "," + fmt(row.mismatch) + "\n";
            }
    }
    write_text(prepare_output_dir(cfg) / "bands.csv", csv);
    return 0;
}

int cmd_resonator(const ExperimentConfig& cfg) {
    std::string csv = "omega,re_meff,im_meff\n";
    for (double omega : cfg.omega.values()) {
        try {
            const cplx m = effective_mass(cfg.resonator, omega);
            csv += fmt(omega) + "," + fmt(m.real()) + "," + fmt(m.imag()) + "\n";
        } catch (const std::domain_error& e) {
            std::fprintf(stderr, "note: omega = %g: %s\n", omega, e.what());
            csv += fmt(omega) + ",nan,nan\n";
        }
    }
    const fs::path dir = prepare_output_dir(cfg);
    write_text(dir / "resonator.csv", csv);

    if (!cfg.design_targets.empty()) {
        std::string design = "target_re,target_im,m_core,k_total,gamma,status\n";
        for (const cplx& target : cfg.design_targets) {
            try {
                const ResonatorParams r =
                    design_for_mass(target, cfg.omega.scalar(), cfg.resonator.m_shell);
                design += fmt(target.real()) + "," + fmt(target.imag()) + "," +
                          fmt(r.m_core) + "," + fmt(r.k_total) + "," + fmt(r.gamma) +
                          ",ok\n";
            } catch (const std::invalid_argument& e) {
                std::fprintf(stderr, "note: target (%g, %g): %s\n", target.real(),
                             target.imag(), e.what());
                design += fmt(target.real()) + "," + fmt(target.imag()) +
                          ",nan,nan,nan,infeasible\n";
            }
        }
        write_text(dir / "design.csv", design);
    }
    return 0;
}

int cmd_perturb(const ExperimentConfig& cfg) {
    const PerturbationStudy study = perturbation_study(
        cfg.cell, cfg.omega.scalar(), cfg.epsilons, cfg.trials, cfg.seed, cfg.nx, cfg.ny);

    std::string csv = "epsilon,mean_deviation,max_deviation,excluded_trials\n";
    njson points = njson::array();
    for (const PerturbationPoint& pt : study.points) {
        csv += fmt(pt.epsilon) + "," + fmt(pt.mean_dev) + "," + fmt(pt.max_dev) + "," +
               std::to_string(pt.excluded) + "\n";
        points.push_back(njson{{"epsilon", pt.epsilon},
                               {"mean_deviation", pt.mean_dev},
                               {"max_deviation", pt.max_dev},
                               {"excluded_trials", pt.excluded}});
    }
    njson out{{"omega", cfg.omega.scalar()},
              {"trials", cfg.trials},
              {"seed", cfg.seed},
              {"slope", finite_or_null(study.slope)},
              {"points", points}};
    const fs::path dir = prepare_output_dir(cfg);
    write_text(dir / "perturb.csv", csv);
    write_text(dir / "perturb.json", out.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frequency-domain simulator and homogenizer for a 2D mass-spring "
                 "lattice with hidden rod-guided masses (Willis coupling)"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_override;
    int threads_override = 0;

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"tensors", "write the analytic constitutive tensors as JSON"},
        {"homogenize", "run the finite-sample convergence study"},
        {"dispersion", "compare discrete Bloch bands with the effective medium"},
        {"resonator", "sweep the core-shell resonator effective mass"},
        {"perturb", "measure sensitivity of the law to parameter jitter"},
        {"validate", "parse and validate a configuration, then exit"}};
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "JSON experiment configuration")
            ->required();
        sub->add_option("--output", output_override,
                        "output directory (overrides output_dir in the config)");
        sub->add_option("--threads", threads_override,
                        "worker threads (overrides threads in the config)")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg = load_config_file(config_path);
        if (!output_override.empty()) cfg.output_dir = output_override;
        if (threads_override > 0) cfg.threads = threads_override;

        if (app.got_subcommand("tensors")) return cmd_tensors(cfg);
        if (app.got_subcommand("homogenize")) return cmd_homogenize(cfg);
        if (app.got_subcommand("dispersion")) return cmd_dispersion(cfg);
        if (app.got_subcommand("resonator")) return cmd_resonator(cfg);
        if (app.got_subcommand("perturb")) return cmd_perturb(cfg);
        std::printf("config ok\n");
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 1;
    }
}
