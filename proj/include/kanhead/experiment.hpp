#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "kanhead/bench.hpp"
#include "kanhead/checkpoint.hpp"
#include "kanhead/config.hpp"
#include "kanhead/dataset.hpp"
#include "kanhead/embeddings.hpp"
#include "kanhead/metrics.hpp"
#include "kanhead/training.hpp"

namespace kanhead {

/// CLI exit codes.
enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_data = 2, exit_runtime = 3 };

/// Maps the active exception to an exit code.
inline int classify_exception(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return exit_config;
    if (dynamic_cast<const DataError*>(&e)) return exit_data;
    return exit_runtime;
}

struct PreparedData {
    LabeledDataset all;
    LabeledDataset train;
    LabeledDataset test;
};

/// Loads the dataset and makes the stratified split from the master seed,
/// so every grid cell sees the same partition.
inline PreparedData prepare_data(const ExperimentConfig& cfg) {
    if (cfg.dataset.empty()) throw ConfigError("no dataset given (set 'dataset = PATH')");
    PreparedData d;
    d.all = load_tsv(cfg.dataset);
    if (d.all.size() == 0) throw DataError("dataset '" + cfg.dataset + "' has no records");
    if (d.all.num_classes() < 2) throw DataError("dataset '" + cfg.dataset + "' needs at least two classes");
    auto [train, test] = stratified_split(d.all, cfg.test_fraction, Rng(cfg.seed).stream("split"));
    d.train = std::move(train);
    d.test = std::move(test);
    return d;
}

inline std::unique_ptr<Embedder> make_embedder(const EmbeddingChoice& choice, const ExperimentConfig& cfg,
                                               const LabeledDataset& train, Rng rng) {
    switch (choice.kind) {
    case EmbeddingKind::tfidf:
        return std::make_unique<TfIdfEmbedder>(Vocabulary::build(train, cfg.max_vocab));
    case EmbeddingKind::random:
        return std::make_unique<TableEmbedder>(
            TableEmbedder::random(Vocabulary::build(train, cfg.max_vocab), cfg.embed_dim, rng, cfg.trainable_for(choice)));
    case EmbeddingKind::vectors: {
        auto wv = read_word_vectors(choice.path);
        return std::make_unique<TableEmbedder>(table_from_word_vectors(
            wv, Vocabulary::build(train, cfg.max_vocab), rng, cfg.trainable_for(choice),
            "Vectors(" + std::filesystem::path(choice.path).filename().string() + ")"));
    }
    case EmbeddingKind::precomputed:
        return std::make_unique<PrecomputedEmbedder>(load_precomputed(choice.path));
    }
    throw ConfigError("unsupported embedding");
}

inline std::string embedding_display_name(const EmbeddingChoice& e) {
    switch (e.kind) {
    case EmbeddingKind::tfidf: return "Tf-IDF";
    case EmbeddingKind::random: return "Random Embedding";
    case EmbeddingKind::vectors: return "Vectors(" + std::filesystem::path(e.path).filename().string() + ")";
    case EmbeddingKind::precomputed: return "Precomputed(" + std::filesystem::path(e.path).filename().string() + ")";
    }
    return "?";
}

inline std::string model_name(const EmbeddingChoice& e, HeadFamily h) {
    return embedding_display_name(e) + " + " + std::string(display_name(h));
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << text;
}

struct CellOutcome {
    BenchReport report;
    RunRecord record;
};

/// Trains one (embedding, head) pair and writes run_record.json,
/// bench_report.json and head.ckpt into `out_dir`.
inline CellOutcome run_cell(const ExperimentConfig& cfg, const PreparedData& data, const EmbeddingChoice& emb,
                            HeadFamily family, std::uint64_t seed, const std::filesystem::path& out_dir) {
    const Rng root(seed);
    auto embedder = make_embedder(emb, cfg, data.train, root.stream("embedding"));
    embedder->bind(data.all);

    Head head(cfg.head_spec(family, embedder->dim(), data.all.num_classes()), root.stream("head").seed());

    TrainConfig tc;
    tc.epochs = cfg.epochs_for(emb);
    tc.batch_size = cfg.batch_for(emb);
    tc.head_lr = cfg.head_lr;
    tc.backbone_lr = cfg.backbone_lr;
    tc.weight_decay = cfg.weight_decay;
    tc.clip_max_norm = cfg.clip_max_norm;
    tc.early_stop_patience = cfg.patience;
    tc.seed = root.stream("train").seed();

    CellOutcome out;
    out.record = train(head, *embedder, data.train, data.test, tc);
    out.record.validation_source = "test split (no separate validation set)";
    const Evaluation ev = evaluate(head, *embedder, data.test);

    const ParamCount hc = count_params(head);
    auto eparams = embedder->params();
    const ParamCount ec = count_params(eparams);
    out.report.model = model_name(emb, family);
    out.report.params_total = hc.total + ec.total;
    out.report.params_trainable = hc.trainable + ec.trainable;
    out.report.train_seconds = out.record.train_seconds;
    out.report.fwd_ms_mean = out.record.fwd_ms_mean;
    out.report.bwd_ms_mean = out.record.bwd_ms_mean;
    out.report.f1_weighted = ev.f1_weighted;
    out.report.accuracy = ev.accuracy;

    std::filesystem::create_directories(out_dir);
    nlohmann::json rec = to_json(out.record);
    rec["model"] = out.report.model;
    rec["seed"] = seed;
    rec["test_f1_weighted"] = ev.f1_weighted;
    rec["test_accuracy"] = ev.accuracy;
    rec["confusion_matrix"] = nlohmann::json::array();
    for (std::size_t t = 0; t < ev.confusion.classes(); ++t) {
        std::vector<std::size_t> row;
        for (std::size_t p = 0; p < ev.confusion.classes(); ++p) row.push_back(ev.confusion(t, p));
        rec["confusion_matrix"].push_back(row);
    }
    rec["label_names"] = data.all.label_names;
    write_text(out_dir / "run_record.json", rec.dump(2) + "\n");
    write_text(out_dir / "bench_report.json", to_json(out.report).dump(2) + "\n");
    save_checkpoint(head, out_dir / "head.ckpt");
    return out;
}

inline void require_single(const ExperimentConfig& cfg, const char* cmd) {
    if (cfg.heads.size() != 1) throw ConfigError(std::string(cmd) + ": 'head' must name exactly one head (use grid for lists)");
    if (cfg.embeddings.size() != 1) {
        throw ConfigError(std::string(cmd) + ": 'embedding' must name exactly one embedding (use grid for lists)");
    }
}

inline int cmd_train(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    require_single(cfg, "train");
    const auto data = prepare_data(cfg);
    const auto outcome = run_cell(cfg, data, cfg.embeddings[0], cfg.heads[0], cfg.seed, cfg.out);
    log << outcome.report.model << ": F1 (weighted) = " << outcome.report.f1_weighted
        << ", accuracy = " << outcome.report.accuracy << " on " << data.test.size() << " held-out records\n";
    return exit_ok;
}

/// Runs every (embedding, head) combination in order. Failures are
/// recorded per cell and the grid carries on.
inline int cmd_grid(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    const auto data = prepare_data(cfg);
    const std::filesystem::path out_dir(cfg.out);
    std::filesystem::create_directories(out_dir);

    std::vector<BenchReport> rows;
    nlohmann::json cells = nlohmann::json::array();
    int status = exit_ok;
    std::size_t index = 0;
    for (const auto& emb : cfg.embeddings) {
        for (HeadFamily h : cfg.heads) {
            const std::uint64_t cell_seed = derive_seed(cfg.seed, index);
            const auto cell_dir = out_dir / ("cell" + std::to_string(index) + "_" + std::string(to_string(h)));
            nlohmann::json cell{{"index", index}, {"embedding", emb.label()}, {"head", to_string(h)}, {"seed", cell_seed}};
            try {
                auto outcome = run_cell(cfg, data, emb, h, cell_seed, cell_dir);
                rows.push_back(outcome.report);
                cell["dir"] = cell_dir.string();
            } catch (const std::exception& e) {
                BenchReport failed;
                failed.model = model_name(emb, h);
                failed.status = e.what();
                rows.push_back(failed);
                if (status == exit_ok) status = classify_exception(e);
                log << "cell " << index << " (" << failed.model << ") failed: " << e.what() << "\n";
            }
            cell["report"] = to_json(rows.back());
            cells.push_back(cell);
            ++index;
        }
    }
    const std::string table = format_table(rows);
    nlohmann::json grid{{"master_seed", cfg.seed}, {"dataset", cfg.dataset}, {"cells", cells}};
    write_text(out_dir / "grid.json", grid.dump(2) + "\n");
    write_text(out_dir / "grid.txt", table);
    log << table;
    return status;
}

/// Latency and parameter report on random inputs, no training.
inline int cmd_bench(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    const std::filesystem::path out_dir(cfg.out);
    std::filesystem::create_directories(out_dir);
    const std::size_t batch = cfg.bench_batch.value_or(cfg.batch_size.value_or(32));

    std::vector<BenchReport> rows;
    for (HeadFamily h : cfg.heads) {
        Head head(cfg.head_spec(h, cfg.input_dim, cfg.num_classes), Rng(cfg.seed).stream("head").seed());
        const auto lat = bench_latency(head, batch, cfg.warmup, cfg.iters, Rng(cfg.seed).stream("bench"));
        const ParamCount pc = count_params(head);
        BenchReport r;
        r.model = std::string(display_name(h)) + " (in=" + std::to_string(cfg.input_dim) +
                  ", out=" + std::to_string(cfg.num_classes) + ")";
        r.params_total = pc.total;
        r.params_trainable = pc.trainable;
        r.fwd_ms_mean = lat.fwd_ms_mean;
        r.bwd_ms_mean = lat.bwd_ms_mean;
        rows.push_back(r);
    }
    nlohmann::json j{{"batch", batch}, {"warmup", cfg.warmup}, {"iters", cfg.iters}, {"rows", nlohmann::json::array()}};
    for (const auto& r : rows) j["rows"].push_back(to_json(r));
    write_text(out_dir / "bench.json", j.dump(2) + "\n");
    log << format_latency_table(rows);
    return exit_ok;
}

} // namespace kanhead
