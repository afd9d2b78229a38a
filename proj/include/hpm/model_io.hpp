#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpm/csv.hpp"
#include "hpm/ensemble.hpp"
#include "hpm/errors.hpp"

namespace hpm {

// On-disk model artifact version; bump on any incompatible layout change.
inline constexpr const char* kModelFormat = "hpm-model/1";

namespace detail {

inline nlohmann::json scaler_json(const Scaler& s) {
    return {{"mean", s.mean}, {"sd", s.sd}};
}

inline Scaler scaler_from_json(const nlohmann::json& j) {
    Scaler s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.sd = j.at("sd").get<std::vector<double>>();
    if (s.mean.size() != s.sd.size()) throw DataError("model artifact: scaler length mismatch");
    return s;
}

// Trees serialize as parallel node-field arrays; compact and order-exact.
inline nlohmann::json tree_json(const Tree& t) {
    nlohmann::json j;
    auto& f = j["feature"] = nlohmann::json::array();
    auto& th = j["threshold"] = nlohmann::json::array();
    auto& v = j["value"] = nlohmann::json::array();
    auto& l = j["left"] = nlohmann::json::array();
    auto& r = j["right"] = nlohmann::json::array();
    for (const auto& n : t.nodes) {
        f.push_back(n.feature);
        th.push_back(n.threshold);
        v.push_back(n.value);
        l.push_back(n.left);
        r.push_back(n.right);
    }
    return j;
}

inline Tree tree_from_json(const nlohmann::json& j) {
    Tree t;
    auto f = j.at("feature").get<std::vector<int>>();
    auto th = j.at("threshold").get<std::vector<double>>();
    auto v = j.at("value").get<std::vector<double>>();
    auto l = j.at("left").get<std::vector<int>>();
    auto r = j.at("right").get<std::vector<int>>();
    size_t n = f.size();
    if (th.size() != n || v.size() != n || l.size() != n || r.size() != n)
        throw DataError("model artifact: tree arrays have unequal lengths");
    t.nodes.resize(n);
    for (size_t i = 0; i < n; ++i) {
        t.nodes[i].feature = f[i];
        t.nodes[i].threshold = th[i];
        t.nodes[i].value = v[i];
        t.nodes[i].left = l[i];
        t.nodes[i].right = r[i];
        if (!t.nodes[i].is_leaf()) {
            if (l[i] < 0 || size_t(l[i]) >= n || r[i] < 0 || size_t(r[i]) >= n)
                throw DataError("model artifact: tree child index out of range");
        }
    }
    return t;
}

} // namespace detail

inline nlohmann::json model_to_json(const AnyModel& m, const std::string& country,
                                    const std::string& spec_name) {
    nlohmann::json j;
    j["format"] = kModelFormat;
    j["country"] = country;
    j["spec"] = spec_name;
    j["feature_names"] = model_feature_names(m);
    if (std::holds_alternative<KnnModel>(m)) {
        const KnnModel& k = std::get<KnnModel>(m);
        j["learner"] = "knn";
        nlohmann::json jk;
        jk["k"] = k.k;
        jk["cv_r2"] = k.cv_r2;
        nlohmann::json table = nlohmann::json::array();
        for (const auto& pt : k.cv_table) table.push_back({{"k", pt.k}, {"cv_rmse", pt.cv_rmse}});
        jk["cv_table"] = table;
        jk["scaler"] = detail::scaler_json(k.scaler);
        jk["train_x"] = k.train_x;
        jk["train_y"] = k.train_y;
        j["knn"] = std::move(jk);
    } else {
        const TreeBagModel& t = std::get<TreeBagModel>(m);
        j["learner"] = "treebag";
        nlohmann::json jt;
        jt["n_bags"] = t.n_bags;
        jt["min_node"] = t.min_node;
        jt["seed"] = t.seed;
        jt["split_gain"] = t.split_gain;
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& tr : t.trees) trees.push_back(detail::tree_json(tr));
        jt["trees"] = std::move(trees);
        j["treebag"] = std::move(jt);
    }
    return j;
}

struct LoadedModel {
    AnyModel model;
    std::string country;
    std::string spec_name;
};

inline LoadedModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("format") || j.at("format") != kModelFormat)
        throw DataError("model artifact: missing or unsupported format tag (expected " +
                        std::string(kModelFormat) + ")");
    LoadedModel out;
    out.country = j.value("country", std::string());
    out.spec_name = j.value("spec", std::string());
    auto names = j.at("feature_names").get<std::vector<std::string>>();
    std::string learner = j.at("learner").get<std::string>();
    if (learner == "knn") {
        const auto& jk = j.at("knn");
        KnnModel k;
        k.k = jk.at("k").get<int>();
        k.cv_r2 = jk.at("cv_r2").get<double>();
        for (const auto& pt : jk.at("cv_table"))
            k.cv_table.push_back({pt.at("k").get<int>(), pt.at("cv_rmse").get<double>()});
        k.scaler = detail::scaler_from_json(jk.at("scaler"));
        k.train_x = jk.at("train_x").get<std::vector<double>>();
        k.train_y = jk.at("train_y").get<std::vector<double>>();
        k.feature_names = names;
        k.n_features = names.size();
        if (k.n_features == 0 || k.train_x.size() != k.train_y.size() * k.n_features)
            throw DataError("model artifact: training matrix shape mismatch");
        out.model = std::move(k);
    } else if (learner == "treebag") {
        const auto& jt = j.at("treebag");
        TreeBagModel t;
        t.n_bags = jt.at("n_bags").get<int>();
        t.min_node = jt.at("min_node").get<int>();
        t.seed = jt.at("seed").get<uint64_t>();
        t.split_gain = jt.at("split_gain").get<std::vector<double>>();
        for (const auto& tr : jt.at("trees")) t.trees.push_back(detail::tree_from_json(tr));
        t.feature_names = names;
        if (t.trees.empty()) throw DataError("model artifact: no trees");
        out.model = std::move(t);
    } else {
        throw DataError("model artifact: unknown learner " + learner);
    }
    return out;
}

// JSON doubles are written with shortest round-trip precision, so a
// save/load/save cycle is byte-identical.
inline void save_model(const std::string& path, const AnyModel& m, const std::string& country,
                       const std::string& spec_name) {
    atomic_write_file(path, model_to_json(m, country, spec_name).dump(2) + "\n");
}

inline LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model artifact " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model artifact " + path + ": " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model artifact " + path + ": " + e.what());
    }
}

} // namespace hpm
