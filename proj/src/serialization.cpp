// Text model format, version 1. Whitespace-separated tokens; every real
// number is a C99 hexadecimal float ("%a"), so a save/load round-trip is
// bit-exact.
//
//   trusthmd-model 1
//   classes <K> <name_0> ... <name_{K-1}>
//   dim <d>
//   members <M>
//   posterior <hard_vote|soft_average>
//   log_base <2|e>
//   master_seed <u64>
//   base <kind> max_depth <int|none> min_samples_split <int> feature_subsample <all|sqrt>
//        learning_rate <x> max_iters <int> tolerance <x> l2 <x> seed <u64>
//   mean <x_0> ... <x_{d-1}>
//   scale <x_0> ... <x_{d-1}>
//   M times:
//     learner <i> kind <kind> seed <u64> converged <0|1> iterations <int> body <tree|linear|constant> <n>
//       tree:     n lines "node <feature> <threshold> <left> <right> <count_0> ... <count_{K-1}>"
//       linear:   n lines "row <bias> <w_0> ... <w_{d-1}>"
//       constant: n is the constant label, no further lines
//   end

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "trusthmd/ensemble.hpp"

namespace trusthmd {

namespace {

constexpr const char* kMagic = "trusthmd-model";
constexpr int kFormatVersion = 1;

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

void write_reals(std::ostream& out, const std::vector<double>& values) {
    for (double v : values) out << ' ' << hex(v);
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string token() {
        std::string t;
        if (!(in_ >> t)) throw Error("model file truncated");
        return t;
    }

    void expect(std::string_view keyword) {
        const std::string t = token();
        if (t != keyword) {
            throw Error("model file: expected '" + std::string(keyword) + "', found '" + t + "'");
        }
    }

    double real() {
        const std::string t = token();
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size()) throw Error("model file: bad real '" + t + "'");
        return v;
    }

    long long integer() {
        const std::string t = token();
        char* end = nullptr;
        const long long v = std::strtoll(t.c_str(), &end, 10);
        if (t.empty() || end != t.c_str() + t.size()) throw Error("model file: bad integer '" + t + "'");
        return v;
    }

    std::uint64_t u64() {
        const std::string t = token();
        char* end = nullptr;
        const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
        if (t.empty() || t[0] == '-' || end != t.c_str() + t.size()) {
            throw Error("model file: bad unsigned '" + t + "'");
        }
        return v;
    }

    std::size_t count(const char* what, long long max = 1LL << 40) {
        const long long v = integer();
        if (v < 0 || v > max) throw Error(std::string("model file: bad ") + what);
        return static_cast<std::size_t>(v);
    }

    std::vector<double> reals(std::size_t n) {
        std::vector<double> v(n);
        for (double& x : v) x = real();
        return v;
    }

private:
    std::istream& in_;
};

}  // namespace

void save_model(const EnsembleModel& model, std::ostream& out) {
    const EnsembleConfig& c = model.config();
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "classes " << model.num_classes();
    for (const std::string& name : model.class_names()) {
        if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos) {
            throw Error("class name '" + name + "' cannot be serialized (empty or contains whitespace)");
        }
        out << ' ' << name;
    }
    out << "\ndim " << model.dim() << "\nmembers " << model.size() << "\nposterior "
        << to_string(c.posterior_mode) << "\nlog_base " << to_string(c.entropy_log_base)
        << "\nmaster_seed " << c.master_seed << '\n';
    out << "base " << to_string(c.base.kind) << " max_depth "
        << (c.base.tree.max_depth ? std::to_string(*c.base.tree.max_depth) : std::string("none"))
        << " min_samples_split " << c.base.tree.min_samples_split << " feature_subsample "
        << to_string(c.base.tree.feature_subsample) << " learning_rate " << hex(c.base.gradient.learning_rate)
        << " max_iters " << c.base.gradient.max_iters << " tolerance " << hex(c.base.gradient.tolerance) << " l2 "
        << hex(c.base.gradient.l2) << " seed " << c.base.seed << '\n';
    out << "mean";
    write_reals(out, model.standardizer().mean);
    out << "\nscale";
    write_reals(out, model.standardizer().scale);
    out << '\n';

    for (std::size_t i = 0; i < model.size(); ++i) {
        const TrainedLearner& l = model.learners()[i];
        out << "learner " << i << " kind " << to_string(l.kind()) << " seed " << l.seed_used() << " converged "
            << (l.converged() ? 1 : 0) << " iterations " << l.iterations() << " body ";
        if (const auto* k = std::get_if<ConstantModel>(&l.params())) {
            out << "constant " << k->label << '\n';
        } else if (const auto* t = std::get_if<TreeModel>(&l.params())) {
            out << "tree " << t->nodes.size() << '\n';
            for (const TreeNode& node : t->nodes) {
                out << "node " << node.feature << ' ' << hex(node.threshold) << ' ' << node.left << ' '
                    << node.right;
                write_reals(out, node.counts);
                out << '\n';
            }
        } else {
            const auto& lin = std::get<LinearModel>(l.params());
            out << "linear " << lin.weights.size() << '\n';
            for (std::size_t r = 0; r < lin.weights.size(); ++r) {
                out << "row " << hex(lin.bias[r]);
                write_reals(out, lin.weights[r]);
                out << '\n';
            }
        }
    }
    out << "end\n";
    if (!out) throw Error("failed writing model");
}

void save_model(const EnsembleModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    save_model(model, out);
    out.close();
    if (!out) throw Error("failed writing '" + path + "'");
}

EnsembleModel load_model(std::istream& in) {
    Reader r(in);
    r.expect(kMagic);
    const long long version = r.integer();
    if (version != kFormatVersion) {
        throw Error("unsupported model format version " + std::to_string(version));
    }
    r.expect("classes");
    std::vector<std::string> classes(r.count("class count", 1 << 20));
    for (std::string& name : classes) name = r.token();
    r.expect("dim");
    const std::size_t dim = r.count("dim");
    r.expect("members");
    const std::size_t members = r.count("member count", 1 << 24);

    EnsembleConfig config;
    config.m = static_cast<int>(members);
    r.expect("posterior");
    config.posterior_mode = parse_posterior_mode(r.token());
    r.expect("log_base");
    config.entropy_log_base = parse_log_base(r.token());
    r.expect("master_seed");
    config.master_seed = r.u64();

    r.expect("base");
    config.base.kind = parse_learner_kind(r.token());
    r.expect("max_depth");
    if (const std::string depth = r.token(); depth != "none") {
        char* end = nullptr;
        const long v = std::strtol(depth.c_str(), &end, 10);
        if (depth.empty() || end != depth.c_str() + depth.size() || v < 1 || v > 1 << 20) {
            throw Error("model file: bad max_depth '" + depth + "'");
        }
        config.base.tree.max_depth = static_cast<int>(v);
    }
    r.expect("min_samples_split");
    config.base.tree.min_samples_split = static_cast<int>(r.integer());
    r.expect("feature_subsample");
    config.base.tree.feature_subsample = parse_feature_subsample(r.token());
    r.expect("learning_rate");
    config.base.gradient.learning_rate = r.real();
    r.expect("max_iters");
    config.base.gradient.max_iters = static_cast<int>(r.integer());
    r.expect("tolerance");
    config.base.gradient.tolerance = r.real();
    r.expect("l2");
    config.base.gradient.l2 = r.real();
    r.expect("seed");
    config.base.seed = r.u64();

    Standardizer standardizer;
    r.expect("mean");
    standardizer.mean = r.reals(dim);
    r.expect("scale");
    standardizer.scale = r.reals(dim);

    const std::size_t k = classes.size();
    std::vector<TrainedLearner> learners;
    learners.reserve(members);
    for (std::size_t i = 0; i < members; ++i) {
        r.expect("learner");
        if (r.count("learner index") != i) throw Error("model file: learners out of order");
        r.expect("kind");
        const LearnerKind kind = parse_learner_kind(r.token());
        r.expect("seed");
        const std::uint64_t seed = r.u64();
        r.expect("converged");
        const bool converged = r.integer() != 0;
        r.expect("iterations");
        const int iterations = static_cast<int>(r.integer());
        r.expect("body");
        const std::string body = r.token();
        LearnerParams params;
        if (body == "constant") {
            params = ConstantModel{static_cast<Label>(r.integer())};
        } else if (body == "tree") {
            TreeModel tree;
            tree.nodes.resize(r.count("node count"));
            for (TreeNode& node : tree.nodes) {
                r.expect("node");
                node.feature = static_cast<int>(r.integer());
                node.threshold = r.real();
                node.left = static_cast<int>(r.integer());
                node.right = static_cast<int>(r.integer());
                node.counts = r.reals(k);
            }
            params = std::move(tree);
        } else if (body == "linear") {
            LinearModel lin;
            const std::size_t rows = r.count("row count", 1 << 20);
            for (std::size_t row = 0; row < rows; ++row) {
                r.expect("row");
                lin.bias.push_back(r.real());
                lin.weights.push_back(r.reals(dim));
            }
            params = std::move(lin);
        } else {
            throw Error("model file: unknown learner body '" + body + "'");
        }
        learners.emplace_back(kind, k, dim, std::move(params), converged, seed, iterations);
    }
    r.expect("end");
    return EnsembleModel(config, std::move(standardizer), std::move(learners), std::move(classes));
}

EnsembleModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file '" + path + "'");
    return load_model(in);
}

}  // namespace trusthmd
