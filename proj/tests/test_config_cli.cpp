#include <gtest/gtest.h>

#include "kanhead/config.hpp"
#include "kanhead/experiment.hpp"
#include "support/cli.hpp"

using namespace kanhead;
using namespace kanhead::testing;

namespace {

std::string config_error(const std::string& text) {
    try {
        parse_config_string(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string toy_config(const fs::path& out, const std::string& extra = "") {
    return "dataset = " + source_path("data/toy.tsv") + "\nhead_lr = 1e-2\nembed_dim = 16\nout = " + out.string() +
           "\n" + extra;
}

} // namespace

TEST(Config, Defaults) {
    const auto c = parse_config_string("");
    EXPECT_EQ(c.heads, std::vector<HeadFamily>{HeadFamily::mlp});
    ASSERT_EQ(c.embeddings.size(), 1u);
    EXPECT_EQ(c.embeddings[0].kind, EmbeddingKind::tfidf);
    EXPECT_EQ(c.grid_size, 8u);
    EXPECT_EQ(c.spline_order, 3u);
    EXPECT_DOUBLE_EQ(c.dropout, 0.3);
    EXPECT_DOUBLE_EQ(c.head_lr, 2e-4);
    EXPECT_DOUBLE_EQ(c.backbone_lr, 2e-5);
    EXPECT_DOUBLE_EQ(c.clip_max_norm, 1.0);
    EXPECT_EQ(c.patience, 3u);
    EXPECT_EQ(c.epochs_for(EmbeddingChoice{}), 15u);
    EXPECT_EQ(c.batch_for(EmbeddingChoice{}), 32u);
    const EmbeddingChoice ctx{EmbeddingKind::precomputed, "x"};
    EXPECT_EQ(c.epochs_for(ctx), 5u);
    EXPECT_EQ(c.batch_for(ctx), 8u);
    EXPECT_TRUE(c.trainable_for(EmbeddingChoice{EmbeddingKind::random, {}}));
    EXPECT_FALSE(c.trainable_for(EmbeddingChoice{EmbeddingKind::vectors, "v"}));
}

TEST(Config, FullFile) {
    const auto c = parse_config_string(R"(# experiment
dataset = data/x.tsv   # trailing comment
embedding = tfidf, vectors:/tmp/v.txt ,precomputed:p.tsv
head = fasterkan,mlp
hidden_dim = 16
activation = sigmoid
grid_size = 5
spline_order = 2
spline_scaler = false
silu_path = yes
fourier_bias = off
dropout = 0
l1_strength = 0.001
epochs = 3
batch_size = 4
head_lr = 0.01
seed = 18446744073709551615
embedding_trainable = true
)");
    EXPECT_EQ(c.dataset, "data/x.tsv");
    ASSERT_EQ(c.embeddings.size(), 3u);
    EXPECT_EQ(c.embeddings[1].path, "/tmp/v.txt");
    EXPECT_EQ(c.embeddings[2].kind, EmbeddingKind::precomputed);
    EXPECT_EQ(c.heads, (std::vector<HeadFamily>{HeadFamily::fasterkan, HeadFamily::mlp}));
    EXPECT_EQ(c.activation, Activation::sigmoid);
    EXPECT_FALSE(c.spline_scaler);
    EXPECT_TRUE(c.silu_path);
    EXPECT_FALSE(c.fourier_bias);
    EXPECT_EQ(c.seed, 18446744073709551615ULL);
    EXPECT_EQ(c.epochs_for(c.embeddings[2]), 3u);
    const auto s = c.head_spec(HeadFamily::efficientkan, 10, 4);
    EXPECT_EQ(s.grid_size, 5u);
    EXPECT_EQ(s.hidden_dim, 16u);
    EXPECT_DOUBLE_EQ(s.l1_strength, 0.001);
}

TEST(Config, DiagnosticsNameKeyAndLine) {
    EXPECT_EQ(config_error("head = mlp\nbogus = 1\n"), "<config>:2: 'bogus': unknown key");
    EXPECT_NE(config_error("seed = 1\nseed = 2").find(":2: 'seed': key given twice"), std::string::npos);
    EXPECT_NE(config_error("grid_size = eight").find(":1: 'grid_size'"), std::string::npos);
    EXPECT_NE(config_error("\n\ndropout = 1.0").find(":3: 'dropout'"), std::string::npos);
    EXPECT_NE(config_error("head = mlp, kan").find("unknown head 'kan'"), std::string::npos);
    EXPECT_NE(config_error("embedding = vectors:").find("'embedding'"), std::string::npos);
    EXPECT_NE(config_error("activation = tanh").find("'activation'"), std::string::npos);
    EXPECT_NE(config_error("just words").find(":1:"), std::string::npos);
    EXPECT_NE(config_error("= 3").find("missing key"), std::string::npos);
    EXPECT_NE(config_error("epochs =").find("'epochs': missing value"), std::string::npos);
    EXPECT_NE(config_error("epochs = 0").find("must be positive"), std::string::npos);
    EXPECT_NE(config_error("head_lr = nan").find("'head_lr'"), std::string::npos);
    EXPECT_NE(config_error("seed = -1").find("'seed'"), std::string::npos);
    EXPECT_NE(config_error("test_fraction = 1").find("'test_fraction'"), std::string::npos);
}

TEST(Config, ParsingIsTotal) {
    // Random mutations of a valid file either parse or raise ConfigError.
    const std::string base = "dataset = d.tsv\nhead = mlp, fasterkan\nembedding = tfidf\ngrid_size = 8\n"
                             "dropout = 0.3\nseed = 9\nhead_lr = 2e-4\nsilu_path = true\n";
    const std::string alphabet = "=#,\n \t:.-+eE0123456789abcdxyz_\x01\xff";
    Rng rng(5);
    std::size_t errors = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        std::string text = base;
        for (std::uint64_t m = 0, n = 1 + rng.below(6); m < n; ++m) {
            const std::size_t at = rng.below(text.size() + 1);
            switch (rng.below(3)) {
            case 0: text.insert(at, 1, alphabet[rng.below(alphabet.size())]); break;
            case 1: if (at < text.size()) text.erase(at, 1); break;
            default: if (at < text.size()) text[at] = alphabet[rng.below(alphabet.size())]; break;
            }
        }
        try {
            parse_config_string(text);
        } catch (const ConfigError& e) {
            ++errors;
            EXPECT_NE(std::string(e.what()).find("<config>:"), std::string::npos) << e.what();
        }
    }
    EXPECT_GT(errors, 100u);
}

TEST(Config, MissingFile) {
    EXPECT_THROW(load_config("/nonexistent/x.conf"), ConfigError);
}

TEST(ExitCodes, Classification) {
    EXPECT_EQ(classify_exception(ConfigError("x")), 1);
    EXPECT_EQ(classify_exception(ParseError("f", 1, "x")), 2);
    EXPECT_EQ(classify_exception(LookupError("x")), 2);
    EXPECT_EQ(classify_exception(ShapeError("x")), 3);
    EXPECT_EQ(classify_exception(std::runtime_error("x")), 3);
}

TEST(Cli, TrainWritesThreeFiles) {
    const auto dir = scratch_dir("train");
    spit(dir / "c.conf", toy_config(dir / "out", "head = fasterkan\n"));
    const auto r = run_cli("train --config " + (dir / "c.conf").string(), dir);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.out.find("Tf-IDF + FasterKAN: F1 (weighted) = "), std::string::npos) << r.out;
    for (const char* f : {"run_record.json", "bench_report.json", "head.ckpt"}) EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    const auto rec = read_json(dir / "out" / "run_record.json");
    EXPECT_EQ(rec.at("seed"), 42);
    EXPECT_EQ(rec.at("label_names").size(), 3u);
    const auto rep = bench_report_from_json(read_json(dir / "out" / "bench_report.json"));
    EXPECT_EQ(rep.status, "ok");
    EXPECT_EQ(rep.latency_unit, "ms per batch");
    Head h = load_checkpoint(dir / "out" / "head.ckpt");
    EXPECT_EQ(h.family(), HeadFamily::fasterkan);
    EXPECT_EQ(count_params(h).total, rep.params_total);
}

TEST(Cli, MissingDatasetNamesPath) {
    const auto dir = scratch_dir("missing");
    spit(dir / "c.conf", "dataset = /no/such/corpus.tsv\nout = " + (dir / "out").string() + "\n");
    const auto r = run_cli("train --config " + (dir / "c.conf").string(), dir);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.err.find("/no/such/corpus.tsv"), std::string::npos) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, ConfigAndUsageErrorsExitOne) {
    const auto dir = scratch_dir("usage");
    spit(dir / "bad.conf", "dataset = x\nwhat = 1\n");
    auto r = run_cli("train --config " + (dir / "bad.conf").string(), dir);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("'what'"), std::string::npos) << r.err;
    EXPECT_EQ(run_cli("train", dir).exit_code, 1);
    EXPECT_EQ(run_cli("frobnicate --config x", dir).exit_code, 1);
    EXPECT_EQ(run_cli("train --config /no/such.conf", dir).exit_code, 1);
    spit(dir / "two.conf", toy_config(dir / "o", "head = mlp, fasterkan\n"));
    EXPECT_EQ(run_cli("train --config " + (dir / "two.conf").string(), dir).exit_code, 1);
}

TEST(Cli, SameSeedSameMetrics) {
    const auto dir = scratch_dir("determinism");
    spit(dir / "c.conf", toy_config(dir / "a", "head = efficientkan\nembedding = random\n"));
    ASSERT_EQ(run_cli("train --config " + (dir / "c.conf").string(), dir).exit_code, 0);
    ASSERT_EQ(run_cli("train --config " + (dir / "c.conf").string() + " --out " + (dir / "b").string(), dir).exit_code, 0);
    EXPECT_EQ(metrics_fields(read_json(dir / "a" / "run_record.json")),
              metrics_fields(read_json(dir / "b" / "run_record.json")));
    EXPECT_EQ(slurp(dir / "a" / "head.ckpt"), slurp(dir / "b" / "head.ckpt"));
}

TEST(Cli, SeedOverride) {
    const auto dir = scratch_dir("seed");
    spit(dir / "c.conf", toy_config(dir / "out"));
    ASSERT_EQ(run_cli("train --config " + (dir / "c.conf").string() + " --seed 99", dir).exit_code, 0);
    EXPECT_EQ(read_json(dir / "out" / "run_record.json").at("seed"), 99);
}

TEST(Cli, GridTwoByTwo) {
    const auto dir = scratch_dir("grid");
    spit(dir / "c.conf", toy_config(dir / "out", "head = mlp, efficientkan\nembedding = tfidf, random\nseed = 5\n"));
    const auto r = run_cli("grid --config " + (dir / "c.conf").string(), dir);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto grid = read_json(dir / "out" / "grid.json");
    ASSERT_EQ(grid.at("cells").size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& cell = grid["cells"][i];
        EXPECT_EQ(cell.at("seed").get<std::uint64_t>(), derive_seed(5, i));
        EXPECT_EQ(cell.at("report").at("status"), "ok");
        for (const char* k : {"model", "params", "train_s", "fwd_ms", "bwd_ms", "f1", "accuracy"})
            EXPECT_TRUE(cell.at("report").contains(k)) << k;
    }
    EXPECT_EQ(grid["cells"][3]["report"]["model"], "Random Embedding + EfficientKAN");
    const std::string table = slurp(dir / "out" / "grid.txt");
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 6); // header, rule, four rows
    EXPECT_EQ(table, r.out);
}

TEST(Cli, GridIsolatesFailingCells) {
    const auto dir = scratch_dir("grid_fail");
    spit(dir / "c.conf", toy_config(dir / "out", "head = mlp, fasterkan\nembedding = vectors:/missing/vec.txt, tfidf\n"));
    const auto r = run_cli("grid --config " + (dir / "c.conf").string(), dir);
    EXPECT_EQ(r.exit_code, 2);
    const auto grid = read_json(dir / "out" / "grid.json");
    ASSERT_EQ(grid.at("cells").size(), 4u);
    int failed = 0;
    for (const auto& cell : grid["cells"]) failed += cell["report"]["status"] != "ok";
    EXPECT_EQ(failed, 2);
    EXPECT_EQ(grid["cells"][2]["report"]["status"], "ok");
}

TEST(Cli, GridWithEveryEmbeddingKind) {
    const auto dir = scratch_dir("grid_kinds");
    spit(dir / "c.conf",
         toy_config(dir / "out", "head = fourierkan\nembedding = vectors:" + source_path("data/toy_vectors.txt") +
                                     ", precomputed:" + source_path("data/toy_precomputed.tsv") + "\n"));
    const auto r = run_cli("grid --config " + (dir / "c.conf").string(), dir);
    ASSERT_EQ(r.exit_code, 0) << r.err << r.out;
    const auto grid = read_json(dir / "out" / "grid.json");
    EXPECT_EQ(grid["cells"][0]["report"]["model"], "Vectors(toy_vectors.txt) + FourierKAN");
    EXPECT_EQ(grid["cells"][1]["report"]["model"], "Precomputed(toy_precomputed.tsv) + FourierKAN");
    const auto rec = read_json(dir / "out" / "cell1_fourierkan" / "run_record.json");
    EXPECT_EQ(rec["config"]["epochs"], 5);
    EXPECT_EQ(rec["config"]["batch_size"], 8);
}

TEST(Cli, BenchReportsFormulaCounts) {
    const auto dir = scratch_dir("bench");
    spit(dir / "c.conf", "head = mlp, fourierkan\ninput_dim = 100\nnum_classes = 6\niters = 3\nwarmup = 1\nout = " +
                             (dir / "out").string() + "\n");
    const auto r = run_cli("bench --config " + (dir / "c.conf").string(), dir);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto j = read_json(dir / "out" / "bench.json");
    ASSERT_EQ(j.at("rows").size(), 2u);
    EXPECT_EQ(j["rows"][0]["params"], 606);
    EXPECT_EQ(j["rows"][1]["params"], 9606);
    EXPECT_EQ(j["iters"], 3);
    EXPECT_EQ(r.out.find("F1"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("FourierKAN (in=100, out=6)"), std::string::npos) << r.out;
}

TEST(Cli, BundledConfigsParse) {
    for (const char* f : {"configs/toy_train.conf", "configs/toy_grid.conf", "configs/bench.conf"})
        EXPECT_NO_THROW(load_config(source_path(f))) << f;
}
