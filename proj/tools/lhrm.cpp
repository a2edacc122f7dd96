// lhrm — LBS-based heterogeneous relations cold-start recommender, end to end.
//
// Subcommands mirror the pipeline stages; `run-all` chains every stage into
// one output directory. Exit codes: 0 ok, 1 validation/config error, 2 data
// error, 3 internal error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lhrm/pipeline.hpp"

namespace {

struct CliState {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string model = "lhrm";
    std::string k_list;
};

lhrm::RunConfig resolve_config(const CliState& st) {
    lhrm::RunConfig cfg;
    bool have_seed = false;
    if (!st.config_path.empty()) {
        cfg = lhrm::RunConfig::load(st.config_path);  // enforces a seed in the file
        have_seed = true;
    }
    if (st.seed_set) {
        cfg.seed = st.seed;
        have_seed = true;
    }
    if (!have_seed)
        throw lhrm::ConfigError("seed is required: pass --seed or set seed= in --config");
    if (!st.k_list.empty()) cfg.set("eval.ks", st.k_list);
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "key=value config file");
    cmd->add_option("--seed", st.seed, "run seed (overrides the config file)")
        ->each([&st](const std::string&) { st.seed_set = true; });
    cmd->add_option("--out", st.out_dir, "artifact directory (default: out)");
}

void print_file(const std::string& path) {
    auto in = lhrm::detail::open_in(path);
    std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LHRM cold-start recommendation pipeline"};
    app.require_subcommand(1);
    CliState st;

    auto* gen = app.add_subcommand("gen-data", "generate the synthetic two-domain log");
    add_common(gen, st);
    auto* pretrain = app.add_subcommand("pretrain", "skip-gram embeddings and user vectors");
    add_common(pretrain, st);
    auto* cluster = app.add_subcommand("cluster", "k-means over warm user vectors");
    add_common(cluster, st);
    auto* groups = app.add_subcommand("build-groups", "user and item embedding groups");
    add_common(groups, st);
    auto* train = app.add_subcommand("train", "train the attention twin-tower scorer");
    add_common(train, st);
    auto* recommend = app.add_subcommand("recommend", "top-k lists for the cold cohort");
    add_common(recommend, st);
    recommend->add_option("--model", st.model, "lhrm | hot | maxcov")
        ->check(CLI::IsMember({"lhrm", "hot", "maxcov"}));
    recommend->add_option("--k", st.k_list, "comma-separated cutoffs (overrides eval.ks)");
    auto* eval = app.add_subcommand("eval", "HR/NDCG report over written recommendations");
    add_common(eval, st);
    std::string eval_model;
    eval->add_option("--model", eval_model, "evaluate one model (default: all three)")
        ->check(CLI::IsMember({"lhrm", "hot", "maxcov"}));
    eval->add_option("--k", st.k_list, "comma-separated cutoffs (overrides eval.ks)");
    auto* run_all = app.add_subcommand("run-all", "every stage end to end");
    add_common(run_all, st);
    run_all->add_option("--k", st.k_list, "comma-separated cutoffs (overrides eval.ks)");

    try {
        app.parse(argc, argv);

        const lhrm::RunConfig cfg = resolve_config(st);
        const lhrm::Paths p{st.out_dir};
        if (gen->parsed()) {
            std::filesystem::create_directories(st.out_dir);
            lhrm::run_stage("gen-data", [&] { lhrm::stage_gen_data(cfg, p); });
            std::cerr << "gen-data: wrote " << p.events() << "\n";
        } else if (pretrain->parsed()) {
            lhrm::run_stage("pretrain", [&] { lhrm::stage_pretrain(cfg, p); });
            std::cerr << "pretrain: wrote " << p.source_emb() << ", " << p.target_emb() << "\n";
        } else if (cluster->parsed()) {
            lhrm::run_stage("cluster", [&] { lhrm::stage_cluster(cfg, p); });
            std::cerr << "cluster: wrote " << p.clusters() << "\n";
        } else if (groups->parsed()) {
            lhrm::run_stage("build-groups", [&] { lhrm::stage_build_groups(cfg, p); });
            std::cerr << "build-groups: wrote " << p.user_groups() << ", " << p.item_groups()
                      << "\n";
        } else if (train->parsed()) {
            lhrm::TrainReport report;
            lhrm::run_stage("train", [&] { report = lhrm::stage_train(cfg, p); });
            std::cerr << "train: best epoch " << report.best_epoch << ", wrote "
                      << p.checkpoint() << "\n";
            if (report.single_label_warning)
                std::cerr << "train: warning: training set has a single label\n";
        } else if (recommend->parsed()) {
            lhrm::run_stage("recommend", [&] { lhrm::stage_recommend(cfg, p, st.model); });
            std::cerr << "recommend: wrote " << p.recommendations(st.model) << "\n";
        } else if (eval->parsed()) {
            std::vector<std::string> models{"lhrm", "hot", "maxcov"};
            if (!eval_model.empty()) models = {eval_model};
            lhrm::run_stage("eval", [&] { lhrm::stage_eval(cfg, p, models); });
            print_file(p.report());
        } else if (run_all->parsed()) {
            lhrm::run_end_to_end(cfg, st.out_dir);
            print_file(p.report());
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // --help is a success; usage errors are validation errors
    } catch (const lhrm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const lhrm::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const lhrm::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const lhrm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
