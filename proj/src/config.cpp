#include "willis/config.hpp"

#include <cmath>
#include <fstream>

namespace willis {

namespace {

using njson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path, msg);
}

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void check_keys(const njson& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) fail(join(path, it.key()), "unknown field");
    }
}

const njson& require(const njson& obj, const std::string& parent, const char* key) {
    if (!obj.contains(key)) fail(join(parent, key), "required field is missing");
    return obj.at(key);
}

double as_number(const njson& value, const std::string& path) {
    if (!value.is_number()) fail(path, "expected a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

std::int64_t as_integer(const njson& value, const std::string& path) {
    if (!value.is_number_integer() && !value.is_number_unsigned())
        fail(path, "expected an integer");
    return value.get<std::int64_t>();
}

cplx as_complex(const njson& value, const std::string& path) {
    if (value.is_number()) return cplx(value.get<double>(), 0.0);
    if (!value.is_object()) fail(path, "expected a number or an object {re, im}");
    check_keys(value, path, {"re", "im"});
    return cplx(as_number(require(value, path, "re"), path + ".re"),
                value.contains("im") ? as_number(value.at("im"), path + ".im") : 0.0);
}

std::vector<double> as_number_list(const njson& value, const std::string& path) {
    std::vector<double> out;
    if (value.is_number()) {
        out.push_back(as_number(value, path));
        return out;
    }
    if (!value.is_array() || value.empty())
        fail(path, "expected a number or a non-empty array of numbers");
    for (std::size_t i = 0; i < value.size(); ++i)
        out.push_back(as_number(value[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

njson complex_json(cplx z) { return njson{{"re", z.real()}, {"im", z.imag()}}; }

}  // namespace

std::vector<double> OmegaSpec::values() const {
    std::vector<double> out;
    if (count <= 1) {
        out.push_back(start);
        return out;
    }
    for (int i = 0; i < count; ++i)
        out.push_back(start + (stop - start) * i / (count - 1));
    return out;
}

void ExperimentConfig::validate() const {
    cell.validate("cell");
    if (omega.count < 1) fail("omega.count", "sweep count must be >= 1");
    if (!std::isfinite(omega.start) || omega.start < 0.0)
        fail("omega.start", "must be finite and non-negative");
    if (!std::isfinite(omega.stop) || omega.stop < 0.0)
        fail("omega.stop", "must be finite and non-negative");
    if (h_list.empty()) fail("h_list", "must not be empty");
    for (double h : h_list)
        if (!(h > 0.0) || !std::isfinite(h)) fail("h_list", "entries must be positive");
    if (nx < 2) fail("sample.nx", "must be >= 2");
    if (ny < 2) fail("sample.ny", "must be >= 2");
    for (const auto& k : k_path)
        if (!std::isfinite(k.x()) || !std::isfinite(k.y()))
            fail("k_path", "entries must be finite");
    resonator.validate();
    for (double eps : epsilons)
        if (!(eps >= 0.0) || !std::isfinite(eps))
            fail("perturbation.epsilon", "entries must be >= 0");
    if (trials < 1) fail("perturbation.trials", "must be >= 1");
    if (threads < 1) fail("threads", "must be >= 1");
    if (output_dir.empty()) fail("output_dir", "must not be empty");
}

ExperimentConfig parse_config(const njson& doc) {
    if (!doc.is_object()) fail("config", "top level must be a JSON object");
    check_keys(doc, "", {"cell", "omega", "h_list", "sample", "k_path", "resonator",
                         "perturbation", "threads", "output_dir"});

    ExperimentConfig cfg;
    cfg.cell.h = 0.01;
    cfg.cell.K = 1.0;
    cfg.cell.m = 1.0;
    cfg.cell.c = 0.5;
    cfg.cell.delta = cplx(0.0, 0.1);

    if (doc.contains("cell")) {
        const njson& cell = doc.at("cell");
        if (!cell.is_object()) fail("cell", "expected an object");
        check_keys(cell, "cell", {"h", "K", "m", "c", "delta", "second_pair"});
        cfg.cell.h = as_number(require(cell, "cell", "h"), "cell.h");
        cfg.cell.K = as_number(require(cell, "cell", "K"), "cell.K");
        cfg.cell.m = as_number(require(cell, "cell", "m"), "cell.m");
        cfg.cell.c = as_number(require(cell, "cell", "c"), "cell.c");
        cfg.cell.delta = as_complex(require(cell, "cell", "delta"), "cell.delta");
        if (cell.contains("second_pair")) {
            const njson& sp = cell.at("second_pair");
            if (!sp.is_object()) fail("cell.second_pair", "expected an object");
            check_keys(sp, "cell.second_pair", {"m_prime", "c_prime"});
            SecondPair pair;
            pair.m_prime = as_number(require(sp, "cell.second_pair", "m_prime"),
                                     "cell.second_pair.m_prime");
            pair.c_prime = as_number(require(sp, "cell.second_pair", "c_prime"),
                                     "cell.second_pair.c_prime");
            cfg.cell.second_pair = pair;
        }
    }

    if (doc.contains("omega")) {
        const njson& w = doc.at("omega");
        if (w.is_number()) {
            cfg.omega.start = cfg.omega.stop = as_number(w, "omega");
            cfg.omega.count = 1;
        } else if (w.is_object()) {
            check_keys(w, "omega", {"start", "stop", "count"});
            cfg.omega.start = as_number(require(w, "omega", "start"), "omega.start");
            cfg.omega.stop = as_number(require(w, "omega", "stop"), "omega.stop");
            const std::int64_t n = as_integer(require(w, "omega", "count"), "omega.count");
            if (n < 1 || n > 10'000'000) fail("omega.count", "must be between 1 and 1e7");
            cfg.omega.count = static_cast<int>(n);
        } else {
            fail("omega", "expected a number or an object {start, stop, count}");
        }
    }

    if (doc.contains("h_list")) cfg.h_list = as_number_list(doc.at("h_list"), "h_list");

    if (doc.contains("sample")) {
        const njson& s = doc.at("sample");
        if (!s.is_object()) fail("sample", "expected an object");
        check_keys(s, "sample", {"nx", "ny"});
        if (s.contains("nx"))
            cfg.nx = static_cast<int>(as_integer(s.at("nx"), "sample.nx"));
        if (s.contains("ny"))
            cfg.ny = static_cast<int>(as_integer(s.at("ny"), "sample.ny"));
    }

    if (doc.contains("k_path")) {
        const njson& path = doc.at("k_path");
        if (!path.is_array()) fail("k_path", "expected an array of [k1, k2] pairs");
        for (std::size_t i = 0; i < path.size(); ++i) {
            const std::string where = "k_path[" + std::to_string(i) + "]";
            const njson& pt = path[i];
            if (!pt.is_array() || pt.size() != 2) fail(where, "expected [k1, k2]");
            cfg.k_path.emplace_back(as_number(pt[0], where + "[0]"),
                                    as_number(pt[1], where + "[1]"));
        }
    } else {
        // Long-wavelength axis sweep: |k| h in {0, 0.0125, 0.025, 0.0375, 0.05}.
        cfg.k_path.emplace_back(0.0, 0.0);
        for (int axis = 0; axis < 2; ++axis)
            for (int i = 1; i <= 4; ++i) {
                const double k = 0.0125 * i / cfg.cell.h;
                cfg.k_path.emplace_back(axis == 0 ? k : 0.0, axis == 0 ? 0.0 : k);
            }
    }

    if (doc.contains("resonator")) {
        const njson& r = doc.at("resonator");
        if (!r.is_object()) fail("resonator", "expected an object");
        check_keys(r, "resonator",
                   {"m_shell", "m_core", "k_total", "gamma", "design_targets"});
        if (r.contains("m_shell"))
            cfg.resonator.m_shell = as_number(r.at("m_shell"), "resonator.m_shell");
        if (r.contains("m_core"))
            cfg.resonator.m_core = as_number(r.at("m_core"), "resonator.m_core");
        if (r.contains("k_total"))
            cfg.resonator.k_total = as_number(r.at("k_total"), "resonator.k_total");
        if (r.contains("gamma"))
            cfg.resonator.gamma = as_number(r.at("gamma"), "resonator.gamma");
        if (r.contains("design_targets")) {
            const njson& targets = r.at("design_targets");
            if (!targets.is_array()) fail("resonator.design_targets", "expected an array");
            for (std::size_t i = 0; i < targets.size(); ++i)
                cfg.design_targets.push_back(as_complex(
                    targets[i], "resonator.design_targets[" + std::to_string(i) + "]"));
        }
    }

    if (doc.contains("perturbation")) {
        const njson& p = doc.at("perturbation");
        if (!p.is_object()) fail("perturbation", "expected an object");
        check_keys(p, "perturbation", {"epsilon", "trials", "seed"});
        if (p.contains("epsilon"))
            cfg.epsilons = as_number_list(p.at("epsilon"), "perturbation.epsilon");
        if (p.contains("trials"))
            cfg.trials = static_cast<int>(as_integer(p.at("trials"), "perturbation.trials"));
        if (p.contains("seed")) {
            const njson& s = p.at("seed");
            if (!s.is_number_integer() && !s.is_number_unsigned())
                fail("perturbation.seed", "expected an integer");
            cfg.seed = s.get<std::uint64_t>();
        }
    }

    if (doc.contains("threads"))
        cfg.threads = static_cast<int>(as_integer(doc.at("threads"), "threads"));

    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string()) fail("output_dir", "expected a string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("config", "cannot open file: " + path);
    njson doc;
    try {
        doc = njson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail("config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

njson to_json(const ExperimentConfig& config) {
    njson cell{{"h", config.cell.h},
               {"K", config.cell.K},
               {"m", config.cell.m},
               {"c", config.cell.c},
               {"delta", complex_json(config.cell.delta)}};
    if (config.cell.second_pair)
        cell["second_pair"] = njson{{"m_prime", config.cell.second_pair->m_prime},
                                    {"c_prime", config.cell.second_pair->c_prime}};

    njson k_path = njson::array();
    for (const auto& k : config.k_path) k_path.push_back({k.x(), k.y()});

    njson targets = njson::array();
    for (const cplx& t : config.design_targets) targets.push_back(complex_json(t));

    return njson{
        {"cell", cell},
        {"omega",
         njson{{"start", config.omega.start},
               {"stop", config.omega.stop},
               {"count", config.omega.count}}},
        {"h_list", config.h_list},
        {"sample", njson{{"nx", config.nx}, {"ny", config.ny}}},
        {"k_path", k_path},
        {"resonator",
         njson{{"m_shell", config.resonator.m_shell},
               {"m_core", config.resonator.m_core},
               {"k_total", config.resonator.k_total},
               {"gamma", config.resonator.gamma},
               {"design_targets", targets}}},
        {"perturbation",
         njson{{"epsilon", config.epsilons}, {"trials", config.trials}, {"seed", config.seed}}},
        {"threads", config.threads},
        {"output_dir", config.output_dir},
    };
}

bool operator==(const OmegaSpec& a, const OmegaSpec& b) {
    return a.start == b.start && a.stop == b.stop && a.count == b.count;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    if (!(a.cell.h == b.cell.h && a.cell.K == b.cell.K && a.cell.m == b.cell.m &&
          a.cell.c == b.cell.c && a.cell.delta == b.cell.delta))
        return false;
    if (a.cell.second_pair.has_value() != b.cell.second_pair.has_value()) return false;
    if (a.cell.second_pair &&
        !(a.cell.second_pair->m_prime == b.cell.second_pair->m_prime &&
          a.cell.second_pair->c_prime == b.cell.second_pair->c_prime))
        return false;
    if (!(a.omega == b.omega)) return false;
    if (a.h_list != b.h_list || a.nx != b.nx || a.ny != b.ny) return false;
    if (a.k_path.size() != b.k_path.size()) return false;
    for (std::size_t i = 0; i < a.k_path.size(); ++i)
        if (a.k_path[i].x() != b.k_path[i].x() || a.k_path[i].y() != b.k_path[i].y())
            return false;
    if (!(a.resonator.m_shell == b.resonator.m_shell &&
          a.resonator.m_core == b.resonator.m_core &&
          a.resonator.k_total == b.resonator.k_total &&
          a.resonator.gamma == b.resonator.gamma))
        return false;
    return a.design_targets == b.design_targets && a.epsilons == b.epsilons &&
           a.trials == b.trials && a.seed == b.seed && a.threads == b.threads &&
           a.output_dir == b.output_dir;
}

}  // namespace willis
