#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "varreg/experiment.hpp"
#include "varreg/index_set.hpp"
#include "varreg/operator.hpp"
#include "varreg/penalty.hpp"
#include "varreg/util.hpp"

namespace varreg {

using ordered_json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; C locale, '.' decimal point.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// RFC-4180 style CSV writer: header row, CRLF line endings, '.' decimals.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& header) { out_ << header << "\r\n"; }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << "\r\n";
    }
    std::string str() const { return out_.str(); }
    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        require(f.good(), "CsvWriter: cannot open " + path);
        f << out_.str();
    }

private:
    std::ostringstream out_;
};

inline void write_coefficients_csv(const Coefficients& x, const std::string& path) {
    CsvWriter w("j,k,value");
    for (std::size_t j = 0; j < x.set.level_count(); ++j)
        for (std::size_t k = 0; k < x.set.level_size(j); ++k)
            w.row({std::to_string(j), std::to_string(k), fmt_double(x[x.set.flat_index(j, k)])});
    w.save(path);
}

/// Reads "j,k,value" rows onto the given index set; missing coordinates stay
/// zero, duplicates are rejected.
inline Coefficients read_coefficients_csv(const std::string& path, const LeveledIndexSet& set) {
    std::ifstream f(path);
    require(f.good(), "read_coefficients_csv: cannot open " + path);
    Coefficients x = Coefficients::zeros(set);
    std::vector<bool> seen(set.size(), false);
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("j,", 0) == 0) continue;  // header
        }
        std::istringstream ss(line);
        std::string a, b, c;
        require(std::getline(ss, a, ',') && std::getline(ss, b, ',') && std::getline(ss, c, ','),
                "read_coefficients_csv: malformed row '" + line + "'");
        std::size_t j = std::stoul(a), k = std::stoul(b);
        std::size_t i = set.flat_index(j, k);
        require(!seen[i], "read_coefficients_csv: duplicate coordinate");
        seen[i] = true;
        x.values[i] = std::stod(c);
        require(std::isfinite(x.values[i]), "read_coefficients_csv: non-finite value");
    }
    return x;
}

inline void check_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    require(obj.is_object(), where + ": expected a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        require(ok, where + ": unknown field '" + it.key() + "'");
    }
}

inline ordered_json coefficients_to_json(const Coefficients& x) {
    ordered_json j;
    j["d"] = x.set.d();
    j["levels"] = x.set.level_sizes();
    if (x.set.flat()) j["flat"] = true;
    j["values"] = x.values;
    return j;
}

inline Coefficients coefficients_from_json(const ordered_json& j) {
    check_keys(j, {"d", "levels", "flat", "values"}, "coefficients");
    bool flat = j.value("flat", false);
    LeveledIndexSet set(j.at("d").get<int>(), j.at("levels").get<std::vector<std::size_t>>(), flat);
    return Coefficients(set, j.at("values").get<std::vector<double>>());
}

inline ordered_json operator_to_json(const DiagonalOperator& A) {
    ordered_json j;
    if (A.besov_degree()) {
        j["mode"] = "besov";
        j["a"] = *A.besov_degree();
        j["d"] = A.set().d();
        j["J"] = A.set().level_count() - 1;
    } else {
        j["mode"] = "explicit";
        j["weights"] = A.weights();
        j["d"] = A.set().d();
        j["levels"] = A.set().level_sizes();
        if (A.set().flat()) j["flat"] = true;
    }
    return j;
}

inline DiagonalOperator operator_from_json(const ordered_json& j) {
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "besov") {
        check_keys(j, {"mode", "a", "d", "J"}, "operator");
        return DiagonalOperator::besov(j.at("d").get<int>(), j.at("J").get<int>(),
                                       j.at("a").get<double>());
    }
    require(mode == "explicit", "operator: mode must be 'besov' or 'explicit'");
    check_keys(j, {"mode", "weights", "d", "levels", "flat"}, "operator");
    auto w = j.at("weights").get<std::vector<double>>();
    LeveledIndexSet set = j.contains("levels")
                              ? LeveledIndexSet(j.value("d", 1),
                                                j.at("levels").get<std::vector<std::size_t>>(),
                                                j.value("flat", false))
                              : LeveledIndexSet::single_level(w.size());
    return DiagonalOperator(std::move(set), std::move(w));
}

inline PenaltySpec penalty_from_json(const ordered_json& j, const LeveledIndexSet& set) {
    std::string type = j.at("type").get<std::string>();
    if (type == "weighted_power") {
        check_keys(j, {"type", "p", "weights", "besov", "uniform"}, "penalty");
        double p = j.at("p").get<double>();
        if (j.contains("weights"))
            return PenaltySpec::weighted_power(p, j.at("weights").get<std::vector<double>>());
        if (j.contains("besov")) {
            check_keys(j.at("besov"), {"s"}, "penalty.besov");
            double s = j.at("besov").at("s").get<double>();
            double d = static_cast<double>(set.d());
            return PenaltySpec::weighted_power(p, dyadic_level_weights(set, s + d / 2.0 - d / p));
        }
        double u = j.value("uniform", 1.0);
        return PenaltySpec::weighted_power(p, uniform_weights(set, u));
    }
    require(type == "level_two_q", "penalty: type must be 'weighted_power' or 'level_two_q'");
    check_keys(j, {"type", "q"}, "penalty");
    return PenaltySpec::level_two_q(j.at("q").get<double>());
}

inline ordered_json penalty_to_json(const PenaltySpec& R) {
    ordered_json j;
    if (R.kind() == PenaltySpec::Kind::weighted_power) {
        j["type"] = "weighted_power";
        j["p"] = R.homogeneity();
        j["weights"] = R.rbar();
    } else {
        j["type"] = "level_two_q";
        j["q"] = R.homogeneity();
    }
    return j;
}

/// Versioned experiment config; unknown fields are rejected so configs cannot
/// drift silently.
inline ExperimentConfig experiment_config_from_json(const ordered_json& j) {
    check_keys(j,
               {"version", "operator", "penalty", "truth", "deltas", "rule", "error_norm",
                "master_seed", "rho", "theory_slope"},
               "config");
    require(j.at("version").get<int>() == 1, "config: unsupported version");

    DiagonalOperator op = operator_from_json(j.at("operator"));
    PenaltySpec pen = penalty_from_json(j.at("penalty"), op.set());

    TruthSpec truth;
    {
        const auto& t = j.at("truth");
        std::string kind = t.at("type").get<std::string>();
        if (kind == "besov_decay") {
            check_keys(t, {"type", "s", "inner_p", "space"}, "truth");
            truth.kind = TruthSpec::Kind::besov_decay;
            truth.s = t.at("s").get<double>();
            truth.inner_p = t.value("inner_p", 2.0);
            std::string space = t.value("space", "sup");
            require(space == "sup" || space == "tt", "truth: space must be 'sup' or 'tt'");
            truth.sup_space = (space == "sup");
        } else if (kind == "spikes") {
            check_keys(t, {"type", "spikes"}, "truth");
            truth.kind = TruthSpec::Kind::spikes;
            for (const auto& sp : t.at("spikes")) {
                check_keys(sp, {"j", "k", "value"}, "truth.spikes");
                truth.spikes.emplace_back(sp.at("j").get<std::size_t>(),
                                          sp.at("k").get<std::size_t>(),
                                          sp.at("value").get<double>());
            }
        } else {
            require(kind == "explicit", "truth: unknown type");
            check_keys(t, {"type", "coefficients"}, "truth");
            truth.kind = TruthSpec::Kind::explicit_coeffs;
            truth.explicit_x = coefficients_from_json(t.at("coefficients"));
        }
    }

    DeltaGridSpec deltas;
    {
        const auto& d = j.at("deltas");
        check_keys(d, {"max", "min", "count"}, "deltas");
        deltas.max = d.at("max").get<double>();
        deltas.min = d.at("min").get<double>();
        deltas.count = d.at("count").get<std::size_t>();
    }

    ExperimentConfig cfg{std::move(op), std::move(pen), std::move(truth), deltas,
                         std::nullopt,  std::nullopt,   ErrorNormSpec{}};
    {
        const auto& r = j.at("rule");
        std::string type = r.at("type").get<std::string>();
        if (type == "apriori") {
            check_keys(r, {"type", "nu", "theta", "u", "c_l", "c_r"}, "rule");
            AprioriRuleSpec ap;
            if (r.contains("nu")) {
                ap.exponent = RateExponent::from_nu(r.at("nu").get<double>());
            } else {
                ap.exponent =
                    RateExponent::from_theta_u(r.at("theta").get<double>(), r.at("u").get<double>());
            }
            ap.c_l = r.value("c_l", 1.0);
            ap.c_r = r.value("c_r", 1.0);
            if (j.contains("rho")) ap.rho = j.at("rho").get<double>();
            cfg.apriori = ap;
        } else {
            require(type == "discrepancy", "rule: type must be 'apriori' or 'discrepancy'");
            check_keys(r, {"type", "c_d", "C_d"}, "rule");
            cfg.discrepancy = DiscrepancyRuleSpec{r.at("c_d").get<double>(), r.at("C_d").get<double>()};
        }
    }
    {
        const auto& e = j.at("error_norm");
        std::string type = e.at("type").get<std::string>();
        if (type == "besov") {
            check_keys(e, {"type", "s", "p", "q"}, "error_norm");
            cfg.error_norm.kind = ErrorNormSpec::Kind::besov;
            cfg.error_norm.besov =
                BesovParams{e.at("s").get<double>(), Exponent(e.at("p").get<double>()),
                            Exponent(e.at("q").get<double>())};
        } else {
            require(type == "weighted", "error_norm: type must be 'besov' or 'weighted'");
            check_keys(e, {"type", "p", "weights", "uniform"}, "error_norm");
            cfg.error_norm.kind = ErrorNormSpec::Kind::weighted;
            cfg.error_norm.p = e.at("p").get<double>();
            if (e.contains("weights"))
                cfg.error_norm.weights = e.at("weights").get<std::vector<double>>();
            else
                cfg.error_norm.weights = uniform_weights(cfg.op.set(), e.value("uniform", 1.0));
        }
    }
    cfg.master_seed = j.value("master_seed", std::uint64_t{1});
    if (j.contains("theory_slope")) cfg.theory_slope = j.at("theory_slope").get<double>();
    return cfg;
}

inline ordered_json load_json(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "load_json: cannot open " + path);
    ordered_json j;
    f >> j;
    return j;
}

inline void save_json(const ordered_json& j, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "save_json: cannot open " + path);
    f << j.dump(2) << "\n";
}

}  // namespace varreg
