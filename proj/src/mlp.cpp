#include "aes/mlp.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include "aes/csv.hpp"
#include "aes/error.hpp"
#include "aes/metrics.hpp"
#include "aes/ordinal.hpp"
#include "aes/parallel.hpp"
#include "aes/rng.hpp"
#include "aes/version.hpp"

namespace aes::mlp {

const char* to_string(Loss l) {
    return l == Loss::softmax_cross_entropy ? "softmax_cross_entropy" : "ordinal_bce";
}

Loss loss_from_string(const std::string& s) {
    if (s == "softmax_cross_entropy" || s == "softmax") {
        return Loss::softmax_cross_entropy;
    }
    if (s == "ordinal_bce" || s == "ordinal") {
        return Loss::ordinal_bce;
    }
    throw ValidationError("unknown mlp loss '" + s + "'");
}

int MlpConfig::output_size() const { return loss == Loss::softmax_cross_entropy ? 6 : ordinal::kThresholds; }

void MlpConfig::validate() const {
    auto fail = [](const std::string& what) { throw ValidationError("mlp config: " + what); };
    for (int h : hidden) {
        if (h <= 0) fail("hidden layer sizes must be positive");
    }
    if (!(step_size > 0) || !std::isfinite(step_size)) fail("step_size must be positive");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) fail("betas must be in [0, 1)");
    if (!(epsilon > 0)) fail("epsilon must be positive");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (epochs < 0) fail("epochs must be >= 0");
    if (k_folds < 2) fail("k_folds must be >= 2");
}

nlohmann::json MlpConfig::to_json() const {
    return {{"hidden", hidden},       {"loss", to_string(loss)}, {"step_size", step_size}, {"beta1", beta1},
            {"beta2", beta2},         {"epsilon", epsilon},      {"batch_size", batch_size}, {"epochs", epochs},
            {"k_folds", k_folds},     {"seed", seed}};
}

MlpConfig MlpConfig::from_json(const nlohmann::json& j) {
    try {
        MlpConfig c;
        c.hidden = j.at("hidden").get<std::vector<int>>();
        c.loss = loss_from_string(j.at("loss").get<std::string>());
        c.step_size = j.at("step_size").get<double>();
        c.beta1 = j.at("beta1").get<double>();
        c.beta2 = j.at("beta2").get<double>();
        c.epsilon = j.at("epsilon").get<double>();
        c.batch_size = j.at("batch_size").get<int>();
        c.epochs = j.at("epochs").get<int>();
        c.k_folds = j.at("k_folds").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed mlp config: ") + e.what());
    }
}

std::vector<int> MlpModel::layer_sizes() const {
    std::vector<int> s{input_size};
    for (const auto& w : weights) {
        s.push_back(static_cast<int>(w.rows()));
    }
    return s;
}

void MlpModel::check_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (!weights[l].allFinite()) {
            throw NumericError("non-finite weight in layer " + std::to_string(l));
        }
        if (!biases[l].allFinite()) {
            throw NumericError("non-finite bias in layer " + std::to_string(l));
        }
    }
}

MlpModel init_model(int input_size, const MlpConfig& config, std::uint64_t seed) {
    config.validate();
    if (input_size <= 0) {
        throw ValidationError("mlp input size must be positive");
    }
    MlpModel m;
    m.config = config;
    m.input_size = input_size;
    std::vector<int> sizes{input_size};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(config.output_size());
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const double limit = std::sqrt(6.0 / sizes[l]);
        Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
        // Row-major draw order so the sequence does not depend on storage order.
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                w(r, c) = rng.uniform(-limit, limit);
            }
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
    }
    return m;
}

namespace {

void check_width(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != model.input_size) {
        throw ValidationError("input width " + std::to_string(inputs.rows()) + " does not match model input size " +
                              std::to_string(model.input_size));
    }
}

/// Pre-activations of every layer; activations[l] feeds layer l.
void forward_all(const MlpModel& model, const Eigen::MatrixXd& inputs, std::vector<Eigen::MatrixXd>& pre,
                 std::vector<Eigen::MatrixXd>& act) {
    const std::size_t layers = model.weights.size();
    pre.resize(layers);
    act.resize(layers);
    act[0] = inputs;
    for (std::size_t l = 0; l < layers; ++l) {
        pre[l] = model.weights[l] * act[l];
        pre[l].colwise() += model.biases[l];
        if (l + 1 < layers) {
            act[l + 1] = pre[l].cwiseMax(0.0);
        }
    }
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    check_width(model, inputs);
    std::vector<Eigen::MatrixXd> pre, act;
    forward_all(model, inputs, pre, act);
    return pre.back();
}

Eigen::MatrixXd to_columns(const FeatureMatrix& m, std::span<const std::size_t> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.cols()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = m.row(rows[i]);
        for (std::size_t c = 0; c < row.size(); ++c) {
            out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = row[c];
        }
    }
    return out;
}

Eigen::MatrixXd to_columns(const FeatureMatrix& m) {
    std::vector<std::size_t> rows(m.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return to_columns(m, rows);
}

namespace {

ScoreDistribution distribution_of(const MlpModel& model, const Eigen::MatrixXd& logits, Eigen::Index c) {
    ScoreDistribution p{};
    const auto k = static_cast<std::size_t>(logits.rows());
    std::array<double, 6> z{};
    for (std::size_t i = 0; i < k; ++i) {
        z[i] = logits(static_cast<Eigen::Index>(i), c);
    }
    if (model.config.loss == Loss::softmax_cross_entropy) {
        softmax(std::span<const double>(z.data(), k), p);
    } else {
        std::array<double, ordinal::kThresholds> q{};
        for (std::size_t t = 0; t < k; ++t) q[t] = sigmoid(z[t]);
        p = ordinal::to_distribution(q);
    }
    return p;
}

int label_of(const MlpModel& model, const Eigen::MatrixXd& logits, Eigen::Index c) {
    if (model.config.loss == Loss::ordinal_bce) {
        std::array<double, ordinal::kThresholds> q{};
        for (std::size_t t = 0; t < q.size(); ++t) q[t] = sigmoid(logits(static_cast<Eigen::Index>(t), c));
        return ordinal::decode(q);
    }
    const auto z = logits.col(c);
    return argmax_label(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
}

void check_schema(const MlpModel& model, const FeatureMatrix& features) {
    if (!model.feature_names.empty() && features.column_names() != model.feature_names) {
        throw ValidationError("feature schema mismatch: model expects " + std::to_string(model.feature_names.size()) +
                              " named columns, input has " + std::to_string(features.cols()));
    }
}

}  // namespace

std::vector<ScoreDistribution> predict_proba(const MlpModel& model, const FeatureMatrix& features) {
    check_schema(model, features);
    const auto logits = forward(model, to_columns(features));
    std::vector<ScoreDistribution> out(features.rows());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = distribution_of(model, logits, static_cast<Eigen::Index>(i));
    }
    return out;
}

std::vector<int> predict_labels(const MlpModel& model, const FeatureMatrix& features) {
    check_schema(model, features);
    const auto logits = forward(model, to_columns(features));
    std::vector<int> out(features.rows());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = label_of(model, logits, static_cast<Eigen::Index>(i));
    }
    return out;
}

double loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs, std::span<const int> labels,
                          Gradients* grads) {
    check_width(model, inputs);
    const Eigen::Index n = inputs.cols();
    if (static_cast<std::size_t>(n) != labels.size() || n == 0) {
        throw ValidationError("batch has " + std::to_string(n) + " columns but " + std::to_string(labels.size()) +
                              " labels");
    }
    for (int y : labels) {
        if (y < 1 || y > 6) {
            throw ValidationError("label " + std::to_string(y) + " outside 1..6");
        }
    }
    std::vector<Eigen::MatrixXd> pre, act;
    forward_all(model, inputs, pre, act);
    const Eigen::MatrixXd& z = pre.back();
    const Eigen::Index k = z.rows();

    // delta = d(mean loss)/d(output pre-activation)
    Eigen::MatrixXd delta(k, n);
    double total = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
        const int y = labels[static_cast<std::size_t>(c)];
        if (model.config.loss == Loss::softmax_cross_entropy) {
            const double hi = z.col(c).maxCoeff();
            double s = 0;
            for (Eigen::Index i = 0; i < k; ++i) s += std::exp(z(i, c) - hi);
            total += hi + std::log(s) - z(y - 1, c);
            for (Eigen::Index i = 0; i < k; ++i) {
                delta(i, c) = std::exp(z(i, c) - hi) / s - (i == y - 1 ? 1.0 : 0.0);
            }
        } else {
            const auto code = ordinal::encode(y);
            for (Eigen::Index t = 0; t < k; ++t) {
                const double target = code[static_cast<std::size_t>(t)];
                total += softplus(z(t, c)) - target * z(t, c);
                delta(t, c) = sigmoid(z(t, c)) - target;
            }
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    if (grads != nullptr) {
        const std::size_t layers = model.weights.size();
        grads->weights.resize(layers);
        grads->biases.resize(layers);
        delta *= inv_n;
        for (std::size_t l = layers; l-- > 0;) {
            grads->weights[l] = delta * act[l].transpose();
            grads->biases[l] = delta.rowwise().sum();
            if (l > 0) {
                Eigen::MatrixXd back = model.weights[l].transpose() * delta;
                delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
            }
        }
    }
    return total * inv_n;
}

Adam::Adam(const MlpModel& model) {
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        m_.weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        m_.biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }
    v_ = m_;
}

namespace {

template <typename P>
void adam_update(P& param, P& m, P& v, const P& g, const MlpConfig& c, double correction1, double correction2) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    param.array() -= c.step_size * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.epsilon);
}

}  // namespace

void Adam::step(MlpModel& model, const Gradients& grads) {
    ++t_;
    const auto& c = model.config;
    const double correction1 = 1.0 - std::pow(c.beta1, t_);
    const double correction2 = 1.0 - std::pow(c.beta2, t_);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        adam_update(model.weights[l], m_.weights[l], v_.weights[l], grads.weights[l], c, correction1, correction2);
        adam_update(model.biases[l], m_.biases[l], v_.biases[l], grads.biases[l], c, correction1, correction2);
    }
}

std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) {
        throw ValidationError("k_folds must be >= 2");
    }
    if (n < static_cast<std::size_t>(k)) {
        throw ValidationError("fewer rows (" + std::to_string(n) + ") than folds (" + std::to_string(k) + ")");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "mlp-folds"));
    rng.shuffle(order);
    std::vector<int> fold(n);
    for (std::size_t i = 0; i < n; ++i) {
        fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return fold;
}

namespace {

struct FoldOutcome {
    MlpModel model;
    FoldReport report;
};

FoldOutcome train_fold(const FeatureMatrix& features, std::span<const int> labels, const MlpConfig& config,
                       const std::vector<int>& folds, int fold) {
    std::vector<std::size_t> train_rows, valid_rows;
    for (std::size_t i = 0; i < folds.size(); ++i) {
        (folds[i] == fold ? valid_rows : train_rows).push_back(i);
    }
    const auto f = static_cast<std::uint64_t>(fold);
    FoldOutcome out{init_model(static_cast<int>(features.cols()), config, derive_seed(config.seed, "mlp-init", f)),
                    {}};
    MlpModel& model = out.model;
    model.feature_names = features.column_names();
    model.fold = fold;
    Adam adam(model);
    Rng batch_rng(derive_seed(config.seed, "mlp-batches", f));

    const Eigen::MatrixXd valid_x = to_columns(features, valid_rows);
    std::vector<int> valid_truth;
    for (auto r : valid_rows) valid_truth.push_back(labels[r]);

    const auto batch = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> order = train_rows;
    Gradients grads;
    std::vector<int> batch_labels;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        batch_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += batch, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + batch);
            std::span<const std::size_t> rows(order.data() + start, end - start);
            batch_labels.clear();
            for (auto r : rows) batch_labels.push_back(labels[r]);
            const double loss = loss_and_gradients(model, to_columns(features, rows), batch_labels, &grads);
            if (!std::isfinite(loss)) {
                throw NumericError("mlp diverged: non-finite loss at fold " + std::to_string(fold) + ", epoch " +
                                   std::to_string(epoch) + ", batch " + std::to_string(batch_index));
            }
            loss_sum += loss * static_cast<double>(rows.size());
            adam.step(model, grads);
        }
        model.check_finite();
        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = order.empty() ? 0.0 : loss_sum / static_cast<double>(order.size());
        const auto logits = forward(model, valid_x);
        std::vector<int> predicted(valid_rows.size());
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            predicted[i] = label_of(model, logits, static_cast<Eigen::Index>(i));
        }
        try {
            entry.valid_qwk = metrics::qwk(valid_truth, predicted);
        } catch (const DegenerateQwkError&) {
            entry.valid_qwk.reset();
        }
        model.log.push_back(entry);
    }
    out.report.fold = fold;
    out.report.n_train = train_rows.size();
    out.report.n_valid = valid_rows.size();
    out.report.log = model.log;
    if (!model.log.empty()) {
        out.report.valid_qwk = model.log.back().valid_qwk;
        out.report.final_train_loss = model.log.back().train_loss;
    }
    return out;
}

double rank_value(const std::optional<double>& q) {
    return q ? *q : -std::numeric_limits<double>::infinity();
}

}  // namespace

FitResult fit(const FeatureMatrix& features, std::span<const int> labels, const MlpConfig& config) {
    config.validate();
    if (labels.size() != features.rows()) {
        throw ValidationError("labels (" + std::to_string(labels.size()) + ") not aligned with rows (" +
                              std::to_string(features.rows()) + ")");
    }
    if (features.cols() == 0) {
        throw ValidationError("mlp training needs at least one feature column");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 1 || labels[i] > 6) {
            throw ValidationError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                                  " outside 1..6");
        }
    }
    const auto folds = fold_assignment(features.rows(), config.k_folds, config.seed);

    FitResult result;
    result.folds.resize(static_cast<std::size_t>(config.k_folds));
    std::optional<MlpModel> best;
    std::mutex best_mutex;
    parallel_for(static_cast<std::size_t>(config.k_folds), [&](std::size_t f) {
        auto outcome = train_fold(features, labels, config, folds, static_cast<int>(f));
        std::lock_guard lock(best_mutex);
        result.folds[f] = outcome.report;
        // Order-independent reduction: higher QWK, then lower fold index.
        const double q = rank_value(outcome.report.valid_qwk);
        if (!best) {
            best = std::move(outcome.model);
            return;
        }
        const double b = rank_value(result.folds[static_cast<std::size_t>(best->fold)].valid_qwk);
        if (q > b || (q == b && outcome.model.fold < best->fold)) {
            best = std::move(outcome.model);
        }
    });
    result.best = std::move(*best);
    result.best_fold = result.best.fold;
    double sum = 0;
    std::size_t counted = 0;
    for (const auto& r : result.folds) {
        if (r.valid_qwk) {
            sum += *r.valid_qwk;
            ++counted;
        }
    }
    if (counted > 0) {
        result.mean_fold_qwk = sum / static_cast<double>(counted);
    }
    return result;
}

namespace {

nlohmann::json log_json(const std::vector<EpochLog>& log) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : log) {
        out.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"valid_qwk", e.valid_qwk ? nlohmann::json(*e.valid_qwk) : nlohmann::json(nullptr)}});
    }
    return out;
}

std::vector<EpochLog> log_from_json(const nlohmann::json& j) {
    std::vector<EpochLog> out;
    for (const auto& e : j) {
        EpochLog l;
        l.epoch = e.at("epoch").get<int>();
        l.train_loss = e.at("train_loss").get<double>();
        if (!e.at("valid_qwk").is_null()) {
            l.valid_qwk = e.at("valid_qwk").get<double>();
        }
        out.push_back(l);
    }
    return out;
}

}  // namespace

nlohmann::json FitResult::report_json() const {
    nlohmann::json folds_json = nlohmann::json::array();
    for (const auto& r : folds) {
        folds_json.push_back({{"fold", r.fold},
                              {"n_train", r.n_train},
                              {"n_valid", r.n_valid},
                              {"valid_qwk", r.valid_qwk ? nlohmann::json(*r.valid_qwk) : nlohmann::json(nullptr)},
                              {"final_train_loss", r.final_train_loss},
                              {"log", log_json(r.log)}});
    }
    return {{"best_fold", best_fold},
            {"mean_fold_qwk", mean_fold_qwk ? nlohmann::json(*mean_fold_qwk) : nlohmann::json(nullptr)},
            {"folds", folds_json}};
}

namespace {

std::string tensor_bytes(const Eigen::MatrixXd& m) {
    std::string out;
    out.reserve(static_cast<std::size_t>(m.size()) * 4);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c)));
            for (int b = 0; b < 4; ++b) {
                out.push_back(static_cast<char>((u >> (8 * b)) & 0xffu));
            }
        }
    }
    return out;
}

Eigen::MatrixXd tensor_from_bytes(const std::string& bytes, Eigen::Index rows, Eigen::Index cols,
                                  const std::string& name) {
    if (bytes.size() != static_cast<std::size_t>(rows * cols) * 4) {
        throw ValidationError("tensor file " + name + " has " + std::to_string(bytes.size()) + " bytes, expected " +
                              std::to_string(rows * cols * 4));
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c, i += 4) {
            std::uint32_t u = 0;
            for (int b = 0; b < 4; ++b) {
                u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i + static_cast<std::size_t>(b)]))
                     << (8 * b);
            }
            m(r, c) = static_cast<double>(std::bit_cast<float>(u));
        }
    }
    return m;
}

}  // namespace

void save_model(const MlpModel& model, const std::filesystem::path& dir) {
    model.check_finite();
    nlohmann::json tensors = nlohmann::json::array();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const std::string wname = "layer" + std::to_string(l) + ".weight.f32";
        const std::string bname = "layer" + std::to_string(l) + ".bias.f32";
        write_file(dir / wname, tensor_bytes(model.weights[l]));
        write_file(dir / bname, tensor_bytes(model.biases[l]));
        tensors.push_back({{"name", "layer" + std::to_string(l) + ".weight"},
                           {"file", wname},
                           {"shape", {model.weights[l].rows(), model.weights[l].cols()}}});
        tensors.push_back(
            {{"name", "layer" + std::to_string(l) + ".bias"}, {"file", bname}, {"shape", {model.biases[l].size(), 1}}});
    }
    const nlohmann::json manifest = {
        {"format", kMlpFormat},         {"tool_version", kToolVersion},
        {"dtype", "f32le"},             {"layout", "row-major"},
        {"activation", "relu"},         {"init", "he-uniform"},
        {"config", model.config.to_json()}, {"layer_sizes", model.layer_sizes()},
        {"feature_names", model.feature_names}, {"fold", model.fold},
        {"log", log_json(model.log)},   {"tensors", tensors},
    };
    write_file(dir / "model.json", manifest.dump(2) + "\n");
}

MlpModel load_model(const std::filesystem::path& dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(dir / "model.json"));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError((dir / "model.json").string() + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kMlpFormat) {
            throw ValidationError("unsupported mlp format '" + j.at("format").get<std::string>() + "'");
        }
        MlpModel m;
        m.config = MlpConfig::from_json(j.at("config"));
        const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
        if (sizes.size() != m.config.hidden.size() + 2 || sizes.back() != m.config.output_size()) {
            throw ValidationError("layer_sizes inconsistent with config");
        }
        m.input_size = sizes.front();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.fold = j.at("fold").get<int>();
        m.log = log_from_json(j.at("log"));
        const auto& tensors = j.at("tensors");
        if (tensors.size() != 2 * (sizes.size() - 1)) {
            throw ValidationError("tensor count inconsistent with layer_sizes");
        }
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const auto& wt = tensors[2 * l];
            const auto& bt = tensors[2 * l + 1];
            const auto wfile = wt.at("file").get<std::string>();
            const auto bfile = bt.at("file").get<std::string>();
            m.weights.push_back(tensor_from_bytes(read_file(dir / wfile), sizes[l + 1], sizes[l], wfile));
            m.biases.push_back(tensor_from_bytes(read_file(dir / bfile), sizes[l + 1], 1, bfile).col(0));
        }
        m.check_finite();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed mlp manifest: ") + e.what());
    }
}

}  // namespace aes::mlp
