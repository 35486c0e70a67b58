// senti: train, tune, evaluate and serve sentiment classifiers over
// three-class labeled CSV datasets (textID,text,selected_text,sentiment).
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <CLI11.hpp>

#include "senti/http.hpp"
#include "senti/senti.hpp"

namespace {

std::int64_t artifact_timestamp() {
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        try {
            return std::stoll(epoch);
        } catch (const std::exception&) {
            throw senti::Error("SOURCE_DATE_EPOCH is not an integer");
        }
    }
    return static_cast<std::int64_t>(std::time(nullptr));
}

std::string anonymization_key() {
    const char* key = std::getenv("SENTI_ANON_KEY");
    return key ? key : "";
}

std::vector<senti::LabeledDocument> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw senti::IoFailure("cannot open dataset: " + path);
    return senti::load_csv(in);
}

senti::ModelBundle load_bundle(const std::string& path, senti::ArtifactInfo* info = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw senti::IoFailure("cannot open model artifact: " + path);
    return senti::load_model(in, info);
}

struct PreprocessFlags {
    bool no_stopwords = false;
    bool no_lowercase = false;
    bool no_strip_urls = false;
    bool no_strip_mentions = false;
    std::string stopwords_file;

    senti::PreprocessConfig build() const {
        senti::PreprocessConfig cfg = senti::PreprocessConfig::defaults();
        cfg.strip_stopwords = !no_stopwords;
        cfg.lowercase = !no_lowercase;
        cfg.strip_urls = !no_strip_urls;
        cfg.strip_mentions = !no_strip_mentions;
        if (!stopwords_file.empty()) {
            std::ifstream in(stopwords_file, std::ios::binary);
            if (!in) throw senti::IoFailure("cannot open stopword file: " + stopwords_file);
            cfg.stopword_list.clear();
            for (auto& w : senti::load_stopword_file(in)) cfg.stopword_list.insert(std::move(w));
        }
        return cfg;
    }

    void add_options(CLI::App* cmd) {
        cmd->add_flag("--no-stopwords", no_stopwords, "keep stopwords");
        cmd->add_flag("--no-lowercase", no_lowercase, "keep original casing");
        cmd->add_flag("--no-strip-urls", no_strip_urls, "keep URLs");
        cmd->add_flag("--no-strip-mentions", no_strip_mentions, "keep @mentions");
        cmd->add_option("--stopwords-file", stopwords_file,
                        "stopword list file (one token per line, # comments)");
    }

    std::string describe() const {
        std::ostringstream out;
        out << "stopwords=" << (no_stopwords ? "keep" : "strip")
            << " lowercase=" << (no_lowercase ? "off" : "on")
            << " urls=" << (no_strip_urls ? "keep" : "strip")
            << " mentions=" << (no_strip_mentions ? "keep" : "strip")
            << " stopwords_file=" << (stopwords_file.empty() ? "<builtin>" : stopwords_file);
        return out.str();
    }
};

// Raw-count vectors for the NB counts mode; same vocabulary, no idf, no norm.
std::vector<senti::SparseVector> count_vectors(std::span<const senti::TokenSequence> corpus,
                                               const senti::TfIdfModel& model) {
    std::vector<senti::SparseVector> out;
    out.reserve(corpus.size());
    for (const auto& tokens : corpus) {
        std::map<std::uint32_t, double> counts;
        for (const auto& t : tokens) {
            const auto it = model.vocabulary.term_to_index.find(t);
            if (it != model.vocabulary.term_to_index.end()) counts[it->second] += 1.0;
        }
        senti::SparseVector vec;
        vec.dim = model.dim();
        for (const auto& [index, weight] : counts) vec.entries.push_back({index, weight});
        out.push_back(std::move(vec));
    }
    return out;
}

int cmd_train(const std::string& dataset, const std::string& model_path,
              const std::string& kind, double ratio, std::uint64_t seed, double alpha,
              double c_value, std::size_t max_features, std::size_t epochs,
              double learning_rate, double tolerance, bool nb_counts,
              const PreprocessFlags& pp) {
    std::cerr << "config: train dataset=" << dataset << " model=" << model_path
              << " kind=" << kind << " ratio=" << ratio << " seed=" << seed
              << " alpha=" << alpha << " c=" << c_value << " max_features=" << max_features
              << " epochs=" << epochs << " learning_rate=" << learning_rate
              << " tolerance=" << tolerance << " nb_counts=" << (nb_counts ? "on" : "off")
              << " " << pp.describe() << "\n";

    const auto docs = load_dataset(dataset);
    const auto split = senti::split(docs, ratio, seed);
    const auto dist = senti::label_distribution(split.train);
    std::cerr << "train: " << split.train.size() << " docs (neg=" << dist[0]
              << " neu=" << dist[1] << " pos=" << dist[2] << "), held out "
              << split.test.size() << "\n";

    senti::ModelBundle bundle;
    bundle.preprocess = pp.build();

    std::vector<senti::TokenSequence> tokens;
    tokens.reserve(split.train.size());
    for (const auto& doc : split.train) tokens.push_back(run_pipeline(doc, bundle.preprocess));
    bundle.tfidf = senti::fit_tfidf(tokens, max_features);
    std::cerr << "vocabulary: " << bundle.tfidf.dim() << " terms (cap " << max_features << ")\n";

    std::vector<senti::Label> y;
    y.reserve(split.train.size());
    for (const auto& doc : split.train) y.push_back(doc.label);

    senti::TrainConfig config;
    config.alpha = alpha;
    config.c_value = c_value;
    config.max_epochs = epochs;
    config.learning_rate = learning_rate;
    config.tolerance = tolerance;
    config.seed = seed;

    if (kind == "nb") {
        const auto X = nb_counts ? count_vectors(tokens, bundle.tfidf)
                                 : senti::transform_corpus(tokens, bundle.tfidf);
        bundle.classifier = senti::train_nb(X, y, alpha);
        std::cerr << "trained nb (alpha=" << alpha
                  << ", features=" << (nb_counts ? "counts" : "tfidf") << ")\n";
    } else {
        const auto X = senti::transform_corpus(tokens, bundle.tfidf);
        senti::LinearModel model;
        if (kind == "logreg") {
            model = senti::train_logreg(X, y, config);
        } else {
            model = senti::train_svm(X, y, config);
        }
        std::cerr << "trained " << kind << " (C=" << c_value
                  << ", final objective=" << model.final_objective << ")\n";
        bundle.classifier = std::move(model);
    }

    std::ofstream out(model_path, std::ios::binary);
    if (!out) throw senti::IoFailure("cannot write model artifact: " + model_path);
    const std::string version = senti::save_model(bundle, out, artifact_timestamp());
    out.close();
    std::cerr << "saved " << model_path << " (" << version << ")\n";
    return 0;
}

int cmd_grid_search(const std::string& dataset, const std::string& kind,
                    std::vector<double> grid, std::size_t folds, double ratio,
                    std::uint64_t seed, std::size_t max_features, std::size_t epochs,
                    const PreprocessFlags& pp) {
    std::ostringstream grid_str;
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid_str << (i ? "," : "") << grid[i];
    std::cerr << "config: grid-search dataset=" << dataset << " kind=" << kind << " grid="
              << grid_str.str() << " folds=" << folds << " ratio=" << ratio << " seed=" << seed
              << " max_features=" << max_features << " epochs=" << epochs << " "
              << pp.describe() << "\n";

    const auto docs = load_dataset(dataset);
    const auto split = senti::split(docs, ratio, seed);
    const auto cfg = pp.build();
    std::vector<senti::TokenSequence> tokens;
    std::vector<senti::Label> y;
    tokens.reserve(split.train.size());
    y.reserve(split.train.size());
    for (const auto& doc : split.train) {
        tokens.push_back(run_pipeline(doc, cfg));
        y.push_back(doc.label);
    }
    const auto tfidf = senti::fit_tfidf(tokens, max_features);
    const auto X = senti::transform_corpus(tokens, tfidf);

    senti::TrainConfig base;
    base.max_epochs = epochs;
    base.seed = seed;
    const auto result = senti::grid_search(
        kind == "logreg" ? senti::LinearModel::Kind::Logistic : senti::LinearModel::Kind::Svm, X,
        y, grid, folds, seed, base);

    std::cout << "c,mean_f1_weighted,std_f1_weighted,folds\n";
    for (const auto& point : result.table) {
        std::cout << point.c_value << ',' << point.mean_score << ',' << point.std_score << ',';
        for (std::size_t i = 0; i < point.fold_scores.size(); ++i)
            std::cout << (i ? ";" : "") << point.fold_scores[i];
        std::cout << '\n';
    }
    std::cout << "best_c," << result.best_c << "\n";
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& dataset,
                 const std::string& split_part, double ratio, std::uint64_t seed,
                 const std::string& format, const std::string& output) {
    std::cerr << "config: evaluate model=" << model_path << " dataset=" << dataset
              << " split=" << split_part << " ratio=" << ratio << " seed=" << seed
              << " format=" << format << " output=" << (output.empty() ? "-" : output) << "\n";

    senti::ArtifactInfo info;
    const auto bundle = load_bundle(model_path, &info);
    const auto docs = load_dataset(dataset);

    std::vector<senti::LabeledDocument> subset;
    if (split_part == "all") {
        subset = docs;
    } else {
        auto s = senti::split(docs, ratio, seed);
        subset = split_part == "train" ? std::move(s.train) : std::move(s.test);
    }
    const auto [cm, report] = senti::evaluate(bundle, subset);

    senti::ReportFormat fmt = senti::ReportFormat::PlainTable;
    if (format == "csv") fmt = senti::ReportFormat::Csv;
    else if (format == "jsonl") fmt = senti::ReportFormat::JsonLines;
    const std::string rendered = senti::render_report(cm, report, fmt, info.model_kind);

    if (output.empty() || output == "-") {
        std::cout << rendered;
    } else {
        std::ofstream out(output, std::ios::binary);
        if (!out) throw senti::IoFailure("cannot write report: " + output);
        out << rendered;
    }
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input, bool with_scores) {
    std::cerr << "config: predict model=" << model_path
              << " input=" << (input.empty() ? "-" : input)
              << " scores=" << (with_scores ? "on" : "off") << "\n";
    const auto bundle = load_bundle(model_path);

    std::ifstream file;
    std::istream* in = &std::cin;
    if (!input.empty() && input != "-") {
        file.open(input, std::ios::binary);
        if (!file) throw senti::IoFailure("cannot open input: " + input);
        in = &file;
    }
    std::string line;
    while (std::getline(*in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto pred = senti::classify_text(bundle, line);
        std::cout << senti::to_string(pred.label);
        if (with_scores)
            for (const double s : pred.scores) std::cout << ' ' << s;
        std::cout << '\n';
    }
    return 0;
}

// --- serve ------------------------------------------------------------------

std::atomic<bool> g_stop{false};
std::atomic<bool> g_close_stdin_on_stop{false};
httplib::Server* g_server = nullptr;

void handle_signal(int) {
    g_stop.store(true);
    // unblock a pump thread stuck reading standard input
    if (g_close_stdin_on_stop.load()) ::close(STDIN_FILENO);
    if (g_server != nullptr) g_server->stop();
}

// Line-oriented TCP ingest: each connection sends NDJSON records and receives
// the classified NDJSON back on the same socket.
class TcpIngestListener {
public:
    TcpIngestListener(senti::StreamService& service, int port) : service_(service) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw senti::IoFailure("tcp-ingest: socket() failed");
        const int one = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
            ::listen(fd_, 16) != 0) {
            ::close(fd_);
            throw senti::IoFailure("tcp-ingest: cannot bind 127.0.0.1:" + std::to_string(port));
        }
        accept_thread_ = std::thread([this] { accept_loop(); });
    }

    ~TcpIngestListener() {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        {
            std::lock_guard lock(clients_mutex_);
            for (const int client : clients_) ::shutdown(client, SHUT_RDWR);
        }
        if (accept_thread_.joinable()) accept_thread_.join();
        for (auto& t : workers_)
            if (t.joinable()) t.join();
    }

private:
    void accept_loop() {
        for (;;) {
            const int client = ::accept(fd_, nullptr, nullptr);
            if (client < 0) return;  // listener closed
            {
                std::lock_guard lock(clients_mutex_);
                clients_.push_back(client);
            }
            workers_.emplace_back([this, client] { serve_client(client); });
        }
    }

    void serve_client(int client) {
        std::string buffer;
        char chunk[4096];
        for (;;) {
            const ssize_t n = ::read(client, chunk, sizeof(chunk));
            if (n <= 0) break;
            buffer.append(chunk, static_cast<std::size_t>(n));
            std::size_t nl;
            while ((nl = buffer.find('\n')) != std::string::npos) {
                std::string line = buffer.substr(0, nl);
                buffer.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty()) continue;
                const auto result = service_.ingest_line(line);
                std::string reply;
                if (const auto* rec = std::get_if<senti::ClassifiedRecord>(&result)) {
                    reply = senti::to_json(*rec).dump() + "\n";
                } else {
                    nlohmann::ordered_json j;
                    j["error"] = std::get<senti::DeadLetter>(result).reason;
                    reply = j.dump() + "\n";
                }
                if (::write(client, reply.data(), reply.size()) < 0) break;
            }
        }
        ::close(client);
    }

    senti::StreamService& service_;
    int fd_ = -1;
    std::thread accept_thread_;
    std::vector<std::thread> workers_;
    std::mutex clients_mutex_;
    std::vector<int> clients_;
};

int cmd_serve(const std::string& model_path, const std::string& bind,
              std::int64_t bucket_seconds, std::size_t retained_buckets,
              const std::string& input, const std::string& dead_letter_path, int tcp_port) {
    std::cerr << "config: serve model=" << model_path << " bind=" << bind
              << " bucket_seconds=" << bucket_seconds << " retained_buckets=" << retained_buckets
              << " input=" << (input.empty() ? "<none>" : input) << " dead_letter="
              << (dead_letter_path.empty() ? "<stderr>" : dead_letter_path)
              << " tcp_ingest=" << (tcp_port > 0 ? std::to_string(tcp_port) : "<off>") << "\n";

    const auto bundle = load_bundle(model_path);
    senti::StreamService service(bundle, anonymization_key(), bucket_seconds, retained_buckets);
    std::cerr << "model_version: " << bundle.model_version << "\n";

    const std::size_t colon = bind.rfind(':');
    if (colon == std::string::npos) throw senti::Error("--bind must be host:port");
    const std::string host = bind.substr(0, colon);
    const int port = std::stoi(bind.substr(colon + 1));

    httplib::Server server;
    senti::wire_routes(server, service);
    g_server = &server;
    g_close_stdin_on_stop.store(input == "-");
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    std::ofstream dead_file;
    std::ostream* dead = &std::cerr;
    if (!dead_letter_path.empty()) {
        dead_file.open(dead_letter_path, std::ios::binary);
        if (!dead_file) throw senti::IoFailure("cannot write dead-letter: " + dead_letter_path);
        dead = &dead_file;
    }

    if (!server.bind_to_port(host, port)) {
        g_server = nullptr;
        throw senti::IoFailure("cannot bind " + bind);
    }

    std::unique_ptr<TcpIngestListener> tcp;
    if (tcp_port > 0) tcp = std::make_unique<TcpIngestListener>(service, tcp_port);

    std::thread pump;
    if (!input.empty()) {
        pump = std::thread([&] {
            std::ifstream file;
            std::istream* in = &std::cin;
            if (input != "-") {
                file.open(input, std::ios::binary);
                if (!file) {
                    std::cerr << "cannot open input: " << input << "\n";
                    return;
                }
                in = &file;
            }
            senti::process_stream(service, *in, std::cout, dead);
        });
    }
    std::cerr << "listening on " << bind << "\n";
    server.listen_after_bind();  // returns after stop()
    g_server = nullptr;

    if (pump.joinable()) pump.join();
    tcp.reset();

    const auto counters = service.counters();
    std::cerr << "shutdown: ingested=" << counters.ingested
              << " classified=" << counters.classified
              << " dead_lettered=" << counters.dead_lettered
              << " dropped_late=" << counters.dropped_late << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"senti: three-class sentiment classification toolkit"};
    app.require_subcommand(1);

    // train
    std::string dataset, model_path, kind = "nb";
    double ratio = 0.8, alpha = 1.0, c_value = 1.0, learning_rate = 0.0, tolerance = 1e-4;
    std::uint64_t seed = 42;
    std::size_t max_features = senti::kDefaultMaxFeatures, epochs = 1600, folds = 5;
    bool nb_counts = false;
    PreprocessFlags train_pp;
    auto* train = app.add_subcommand("train", "train a classifier and write the model artifact");
    train->add_option("--dataset", dataset, "labeled CSV")->required();
    train->add_option("--model", model_path, "output artifact path")->required();
    train->add_option("--kind", kind, "classifier: nb, logreg or svm")
        ->check(CLI::IsMember({"nb", "logreg", "svm"}));
    train->add_option("--ratio", ratio, "train fraction of the 80/20-style split");
    train->add_option("--seed", seed, "split and trainer seed");
    train->add_option("--alpha", alpha, "nb smoothing");
    train->add_option("--c", c_value, "inverse regularization strength");
    train->add_option("--max-features", max_features, "vocabulary cap");
    train->add_option("--epochs", epochs, "max training epochs");
    train->add_option("--learning-rate", learning_rate, "fixed step; <=0 = automatic");
    train->add_option("--tolerance", tolerance, "gradient sup-norm stop");
    train->add_flag("--nb-counts", nb_counts, "train nb on raw counts instead of tf-idf");
    train_pp.add_options(train);

    // grid-search
    std::string gs_dataset, gs_kind = "logreg";
    std::vector<double> gs_grid;
    double gs_ratio = 0.8;
    std::uint64_t gs_seed = 42;
    std::size_t gs_max_features = senti::kDefaultMaxFeatures, gs_epochs = 1600;
    PreprocessFlags gs_pp;
    auto* gs = app.add_subcommand("grid-search", "k-fold cross-validated C search");
    gs->add_option("--dataset", gs_dataset, "labeled CSV")->required();
    gs->add_option("--kind", gs_kind, "classifier: logreg or svm")
        ->check(CLI::IsMember({"logreg", "svm"}));
    gs->add_option("--grid", gs_grid, "candidate C values")
        ->delimiter(',');
    gs->add_option("--folds", folds, "cross-validation folds");
    gs->add_option("--ratio", gs_ratio, "train fraction (search runs on the train part)");
    gs->add_option("--seed", gs_seed, "split/fold seed");
    gs->add_option("--max-features", gs_max_features, "vocabulary cap");
    gs->add_option("--epochs", gs_epochs, "max training epochs");
    gs_pp.add_options(gs);

    // evaluate
    std::string ev_model, ev_dataset, ev_split = "all", ev_format = "table", ev_output;
    double ev_ratio = 0.8;
    std::uint64_t ev_seed = 42;
    auto* ev = app.add_subcommand("evaluate", "confusion matrix and metrics on labeled data");
    ev->add_option("--model", ev_model, "model artifact")->required();
    ev->add_option("--dataset", ev_dataset, "labeled CSV")->required();
    ev->add_option("--split", ev_split, "all, train or test part of the seeded split")
        ->check(CLI::IsMember({"all", "train", "test"}));
    ev->add_option("--ratio", ev_ratio, "split ratio (with --split train/test)");
    ev->add_option("--seed", ev_seed, "split seed");
    ev->add_option("--format", ev_format, "table, csv or jsonl")
        ->check(CLI::IsMember({"table", "csv", "jsonl"}));
    ev->add_option("--output", ev_output, "output path (default stdout)");

    // predict
    std::string pr_model, pr_input = "-";
    bool pr_scores = false;
    auto* pr = app.add_subcommand("predict", "one label per input text line");
    pr->add_option("--model", pr_model, "model artifact")->required();
    pr->add_option("--input", pr_input, "text file, - for stdin");
    pr->add_flag("--scores", pr_scores, "append per-class scores");

    // serve
    std::string sv_model, sv_bind = "127.0.0.1:8080", sv_input, sv_dead;
    std::int64_t sv_bucket = 60;
    std::size_t sv_retained = 1440;
    int sv_tcp = 0;
    auto* sv = app.add_subcommand("serve", "real-time classification and trend service");
    sv->add_option("--model", sv_model, "model artifact")->required();
    sv->add_option("--bind", sv_bind, "http listen address host:port");
    sv->add_option("--bucket-seconds", sv_bucket, "trend bucket width");
    sv->add_option("--retained-buckets", sv_retained, "trend retention in buckets");
    sv->add_option("--input", sv_input, "NDJSON file to ingest, - for stdin");
    sv->add_option("--dead-letter", sv_dead, "dead-letter NDJSON path (default stderr)");
    sv->add_option("--tcp-ingest", sv_tcp, "also accept NDJSON on this localhost TCP port");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (train->parsed())
            return cmd_train(dataset, model_path, kind, ratio, seed, alpha, c_value,
                             max_features, epochs, learning_rate, tolerance, nb_counts,
                             train_pp);
        if (gs->parsed()) {
            if (gs_grid.empty())
                gs_grid.assign(senti::kDefaultGrid.begin(), senti::kDefaultGrid.end());
            return cmd_grid_search(gs_dataset, gs_kind, gs_grid, folds, gs_ratio, gs_seed,
                                   gs_max_features, gs_epochs, gs_pp);
        }
        if (ev->parsed())
            return cmd_evaluate(ev_model, ev_dataset, ev_split, ev_ratio, ev_seed, ev_format,
                                ev_output);
        if (pr->parsed()) return cmd_predict(pr_model, pr_input, pr_scores);
        if (sv->parsed())
            return cmd_serve(sv_model, sv_bind, sv_bucket, sv_retained, sv_input, sv_dead,
                             sv_tcp);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
