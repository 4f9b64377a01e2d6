#pragma once

// TrainedModel, the voting ensemble, kind dispatch and the versioned model
// file format.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/error.hpp"
#include "mgtd/models/common.hpp"
#include "mgtd/models/linear.hpp"
#include "mgtd/models/mlp.hpp"
#include "mgtd/models/naive_bayes.hpp"
#include "mgtd/models/tree.hpp"
#include "mgtd/sha256.hpp"
#include "mgtd/tfidf.hpp"

namespace mgtd {

enum class VoteMode { Hard, Soft };

struct TrainedModel;

struct VotingParams {
    std::vector<TrainedModel> members;
    VoteMode mode = VoteMode::Hard;
};

struct TrainedModel {
    ModelKind kind = ModelKind::LR;
    std::size_t feature_dim = 0;
    std::uint64_t seed = 0;
    nlohmann::json training_config = nlohmann::json::object();
    std::variant<LinearParams, MnbParams, TreeParams, ForestParams, VotingParams, MlpParams> params;
};

Prediction predict(const TrainedModel& model, const SparseVector& x);

/// Member output mapped to [0, 1]; margins go through the logistic function.
inline double member_probability(const TrainedModel& m, const SparseVector& x) {
    const auto p = predict(m, x);
    if (const auto* lin = std::get_if<LinearParams>(&m.params); lin && !lin->probabilistic) return sigmoid(p.score);
    return p.score;
}

/// Hard: majority label with score = fraction of members voting 1; a tied
/// vote goes to 1 when the mean member probability is >= 0.5. Soft: mean
/// member probability.
inline Prediction predict_voting(const VotingParams& v, const SparseVector& x) {
    const auto n = static_cast<double>(v.members.size());
    double prob_sum = 0.0;
    std::size_t votes = 0;
    for (const auto& m : v.members) {
        prob_sum += member_probability(m, x);
        if (v.mode == VoteMode::Hard) votes += static_cast<std::size_t>(predict(m, x).label);
    }
    const double mean_prob = prob_sum / n;
    if (v.mode == VoteMode::Soft) return from_probability(mean_prob);
    const double frac = static_cast<double>(votes) / n;
    int label;
    if (2 * votes > v.members.size()) label = 1;
    else if (2 * votes < v.members.size()) label = 0;
    else label = mean_prob >= 0.5 ? 1 : 0;
    return {label, frac};
}

inline Prediction predict(const TrainedModel& model, const SparseVector& x) {
    detail::check_vector_dim(x, model.feature_dim);
    return std::visit(
        [&](const auto& p) -> Prediction {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, VotingParams>) return predict_voting(p, x);
            else return p.predict(x);
        },
        model.params);
}

inline std::vector<Prediction> predict_all(const TrainedModel& model, const std::vector<SparseVector>& X) {
    std::vector<Prediction> out(X.size());
    parallel_for(X.size(), [&](std::size_t i) { out[i] = predict(model, X[i]); });
    return out;
}

inline TrainedModel train_voting(std::vector<TrainedModel> members, VoteMode mode) {
    if (members.empty()) throw Error(ErrorCode::EmptyEnsemble, "voting classifier needs members");
    if (members.size() < 2) throw Error(ErrorCode::EmptyEnsemble, "voting classifier needs at least two members");
    const auto dim = members.front().feature_dim;
    for (const auto& m : members)
        if (m.feature_dim != dim) throw Error(ErrorCode::MixedDimensions, "voting members differ in feature dimension");
    TrainedModel t;
    t.kind = ModelKind::VC;
    t.feature_dim = dim;
    t.seed = members.front().seed;
    nlohmann::json kinds = nlohmann::json::array();
    for (const auto& m : members) kinds.push_back(to_string(m.kind));
    t.training_config = {{"members", kinds}, {"mode", mode == VoteMode::Hard ? "hard" : "soft"}};
    t.params = VotingParams{std::move(members), mode};
    return t;
}

/// Hyperparameters for every kind. `with_seed` points all of them at one seed.
struct ModelConfigs {
    LogRegConfig lr;
    SgdConfig sgd;
    SvmConfig svm;
    TreeConfig dt;
    ForestConfig rf;
    MnbConfig mnb;
    MlpConfig mlp;
    std::vector<ModelKind> vc_members = {ModelKind::LR, ModelKind::RF, ModelKind::MNB};
    VoteMode vc_mode = VoteMode::Hard;

    ModelConfigs& with_seed(std::uint64_t seed) {
        lr.seed = sgd.seed = svm.seed = dt.seed = rf.seed = mlp.seed = seed;
        return *this;
    }

    std::uint64_t seed_of(ModelKind k) const {
        switch (k) {
            case ModelKind::LR: return lr.seed;
            case ModelKind::SGD: return sgd.seed;
            case ModelKind::SVM: return svm.seed;
            case ModelKind::DT: return dt.seed;
            case ModelKind::RF: return rf.seed;
            case ModelKind::MLP: return mlp.seed;
            case ModelKind::MNB:
            case ModelKind::VC: return lr.seed;
        }
        return 0;
    }

    nlohmann::json to_json() const {
        nlohmann::json members = nlohmann::json::array();
        for (auto k : vc_members) members.push_back(to_string(k));
        return {{"lr", lr.to_json()},   {"sgd", sgd.to_json()}, {"svm", svm.to_json()},
                {"dt", dt.to_json()},   {"rf", rf.to_json()},   {"mnb", mnb.to_json()},
                {"mlp", mlp.to_json()}, {"vc", {{"members", members}, {"mode", vc_mode == VoteMode::Hard ? "hard" : "soft"}}}};
    }
};

inline TrainedModel train_model(ModelKind kind, const std::vector<SparseVector>& X, const std::vector<int>& y,
                                std::size_t dim, const ModelConfigs& cfg) {
    TrainedModel m;
    m.kind = kind;
    m.feature_dim = dim;
    m.seed = cfg.seed_of(kind);
    switch (kind) {
        case ModelKind::LR:
            m.params = fit_logreg(X, y, dim, cfg.lr);
            m.training_config = cfg.lr.to_json();
            break;
        case ModelKind::SGD:
            m.params = fit_sgd(X, y, dim, cfg.sgd);
            m.training_config = cfg.sgd.to_json();
            break;
        case ModelKind::SVM:
            m.params = fit_svm(X, y, dim, cfg.svm);
            m.training_config = cfg.svm.to_json();
            break;
        case ModelKind::DT:
            m.params = fit_dtree(X, y, dim, cfg.dt);
            m.training_config = cfg.dt.to_json();
            break;
        case ModelKind::RF:
            m.params = fit_rforest(X, y, dim, cfg.rf);
            m.training_config = cfg.rf.to_json();
            break;
        case ModelKind::MNB:
            m.params = fit_mnb(X, y, dim, cfg.mnb);
            m.training_config = cfg.mnb.to_json();
            break;
        case ModelKind::MLP:
            m.params = fit_mlp(X, y, dim, cfg.mlp);
            m.training_config = cfg.mlp.to_json();
            break;
        case ModelKind::VC: {
            detail::check_training_data(X, y, dim);
            std::vector<TrainedModel> members;
            for (auto k : cfg.vc_members) {
                if (k == ModelKind::VC) throw Error(ErrorCode::InvalidArgument, "voting classifier cannot contain itself");
                members.push_back(train_model(k, X, y, dim, cfg));
            }
            return train_voting(std::move(members), cfg.vc_mode);
        }
    }
    return m;
}

inline TrainedModel train_logreg(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                                 const LogRegConfig& cfg = {}) {
    ModelConfigs c;
    c.lr = cfg;
    return train_model(ModelKind::LR, X, y, dim, c);
}
inline TrainedModel train_mnb(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                              const MnbConfig& cfg = {}) {
    ModelConfigs c;
    c.mnb = cfg;
    return train_model(ModelKind::MNB, X, y, dim, c);
}
inline TrainedModel train_sgd_linear(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                                     const SgdConfig& cfg = {}) {
    ModelConfigs c;
    c.sgd = cfg;
    return train_model(ModelKind::SGD, X, y, dim, c);
}
inline TrainedModel train_svm_linear(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                                     const SvmConfig& cfg = {}) {
    ModelConfigs c;
    c.svm = cfg;
    return train_model(ModelKind::SVM, X, y, dim, c);
}
inline TrainedModel train_dtree(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                                const TreeConfig& cfg = {}) {
    ModelConfigs c;
    c.dt = cfg;
    return train_model(ModelKind::DT, X, y, dim, c);
}
inline TrainedModel train_rforest(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                                  const ForestConfig& cfg = {}) {
    ModelConfigs c;
    c.rf = cfg;
    return train_model(ModelKind::RF, X, y, dim, c);
}
inline TrainedModel train_mlp(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                              const MlpConfig& cfg = {}) {
    ModelConfigs c;
    c.mlp = cfg;
    return train_model(ModelKind::MLP, X, y, dim, c);
}

// ------------------------------------------------------------ persistence

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json params_to_json(const TrainedModel& m);

inline nlohmann::json tree_to_json(const TreeParams& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.n0, n.n1});
    return nodes;
}

inline TreeParams tree_from_json(const nlohmann::json& j) {
    TreeParams t;
    for (const auto& n : j)
        t.nodes.push_back({n.at(0).get<std::int32_t>(), n.at(1).get<double>(), n.at(2).get<std::int32_t>(),
                           n.at(3).get<std::int32_t>(), n.at(4).get<double>(), n.at(5).get<double>()});
    return t;
}

inline nlohmann::json model_to_json(const TrainedModel& m) {
    return {{"kind", to_string(m.kind)},
            {"feature_dim", m.feature_dim},
            {"seed", m.seed},
            {"training_config", m.training_config},
            {"weights", params_to_json(m)}};
}

inline nlohmann::json params_to_json(const TrainedModel& m) {
    return std::visit(
        [&](const auto& p) -> nlohmann::json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, LinearParams>) {
                return {{"w", p.w}, {"b", p.b}, {"probabilistic", p.probabilistic}};
            } else if constexpr (std::is_same_v<P, MnbParams>) {
                return {{"log_prior", p.log_prior}, {"feature_log_prob", p.feature_log_prob}};
            } else if constexpr (std::is_same_v<P, TreeParams>) {
                return {{"nodes", tree_to_json(p)}};
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                nlohmann::json trees = nlohmann::json::array();
                for (const auto& t : p.trees) trees.push_back(tree_to_json(t));
                return {{"trees", trees}};
            } else if constexpr (std::is_same_v<P, VotingParams>) {
                nlohmann::json members = nlohmann::json::array();
                for (const auto& mm : p.members) members.push_back(model_to_json(mm));
                return {{"mode", p.mode == VoteMode::Hard ? "hard" : "soft"}, {"members", members}};
            } else {
                return {{"dim", p.dim}, {"hidden", p.hidden}, {"W1", p.W1}, {"b1", p.b1}, {"w2", p.w2}, {"b2", p.b2}};
            }
        },
        m.params);
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    TrainedModel m;
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown model kind " + j.at("kind").dump());
    m.kind = *kind;
    m.feature_dim = j.at("feature_dim").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.training_config = j.at("training_config");
    const auto& w = j.at("weights");
    switch (m.kind) {
        case ModelKind::LR:
        case ModelKind::SGD:
        case ModelKind::SVM:
            m.params = LinearParams{w.at("w").get<std::vector<double>>(), w.at("b").get<double>(),
                                    w.at("probabilistic").get<bool>()};
            break;
        case ModelKind::MNB: {
            MnbParams p;
            p.log_prior = w.at("log_prior").get<std::array<double, 2>>();
            p.feature_log_prob = w.at("feature_log_prob").get<std::array<std::vector<double>, 2>>();
            m.params = std::move(p);
            break;
        }
        case ModelKind::DT: m.params = tree_from_json(w.at("nodes")); break;
        case ModelKind::RF: {
            ForestParams f;
            for (const auto& t : w.at("trees")) f.trees.push_back(tree_from_json(t));
            m.params = std::move(f);
            break;
        }
        case ModelKind::VC: {
            VotingParams v;
            v.mode = w.at("mode").get<std::string>() == "hard" ? VoteMode::Hard : VoteMode::Soft;
            for (const auto& mm : w.at("members")) v.members.push_back(model_from_json(mm));
            m.params = std::move(v);
            break;
        }
        case ModelKind::MLP: {
            MlpParams p;
            p.dim = w.at("dim").get<std::size_t>();
            p.hidden = w.at("hidden").get<std::size_t>();
            p.W1 = w.at("W1").get<std::vector<double>>();
            p.b1 = w.at("b1").get<std::vector<double>>();
            p.w2 = w.at("w2").get<std::vector<double>>();
            p.b2 = w.at("b2").get<double>();
            m.params = std::move(p);
            break;
        }
    }
    return m;
}

} // namespace detail

/// Serialized model file contents; `sha256` covers the compact dump of the
/// document without the `sha256` member (keys sorted).
inline std::string model_file_contents(const TrainedModel& model, const TfidfModel* tfidf) {
    nlohmann::json doc = {{"format", "mgtd-model"},
                          {"version", kModelFormatVersion},
                          {"kind", to_string(model.kind)},
                          {"tfidf", tfidf ? tfidf->to_json() : nlohmann::json(nullptr)},
                          {"params", detail::model_to_json(model)}};
    doc["sha256"] = sha256_hex(doc.dump());
    return doc.dump();
}

inline void save_model(const TrainedModel& model, const TfidfModel* tfidf, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << model_file_contents(model, tfidf) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

struct LoadedModel {
    TrainedModel model;
    std::optional<TfidfModel> tfidf;
};

inline LoadedModel parse_model_file(std::string_view contents) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(contents);
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::ChecksumMismatch, "model file is corrupted (not valid JSON)");
    }
    if (!doc.is_object() || doc.value("format", "") != "mgtd-model")
        throw Error(ErrorCode::ChecksumMismatch, "model file is corrupted (missing format tag)");
    if (!doc.contains("version") || !doc["version"].is_number_integer() || doc["version"].get<int>() != kModelFormatVersion)
        throw Error(ErrorCode::VersionMismatch, "model file version " + (doc.contains("version") ? doc["version"].dump() : "?") +
                                                    " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
    if (!doc.contains("sha256") || !doc["sha256"].is_string())
        throw Error(ErrorCode::ChecksumMismatch, "model file has no checksum");
    const auto stored = doc["sha256"].get<std::string>();
    doc.erase("sha256");
    if (sha256_hex(doc.dump()) != stored) throw Error(ErrorCode::ChecksumMismatch, "model file checksum does not match");
    LoadedModel out;
    try {
        out.model = detail::model_from_json(doc.at("params"));
        if (!doc.at("tfidf").is_null()) out.tfidf = TfidfModel::from_json(doc.at("tfidf"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ChecksumMismatch, std::string("model file structure invalid: ") + e.what());
    }
    return out;
}

inline LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "file not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_file(ss.str());
}

} // namespace mgtd
