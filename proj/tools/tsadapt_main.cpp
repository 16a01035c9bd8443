#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <utility>
#include <vector>

#include "tsadapt/commands.hpp"
#include "tsadapt/errors.hpp"
#include "tsadapt/run_config.hpp"

namespace {

using tsadapt::RunConfig;

// Binds CLI options to a staging config and replays only the flags the user
// actually passed on top of the file-loaded (or default) config, so the
// precedence is CLI > file > defaults.
class ConfigBinder {
public:
    explicit ConfigBinder(CLI::App* app) : app_(app) {
        app_->add_option("--config", config_path_, "flat key=value config file");
    }

    template <typename T>
    CLI::Option* opt(const std::string& flag, T RunConfig::* member, const std::string& desc) {
        CLI::Option* o = app_->add_option(flag, staged_.*member, desc);
        appliers_.emplace_back(o, [member](RunConfig& dst, const RunConfig& src) {
            dst.*member = src.*member;
        });
        return o;
    }

    template <typename T>
    CLI::Option* synth_opt(const std::string& flag, T tsadapt::SyntheticSpec::* member,
                           const std::string& desc) {
        CLI::Option* o = app_->add_option(flag, staged_.synth.*member, desc);
        appliers_.emplace_back(o, [member](RunConfig& dst, const RunConfig& src) {
            dst.synth.*member = src.synth.*member;
        });
        return o;
    }

    CLI::Option* flag(const std::string& spec, bool RunConfig::* member,
                      const std::string& desc) {
        CLI::Option* o = app_->add_flag(spec, staged_.*member, desc);
        appliers_.emplace_back(o, [member](RunConfig& dst, const RunConfig& src) {
            dst.*member = src.*member;
        });
        return o;
    }

    RunConfig resolve() const {
        RunConfig cfg =
            config_path_.empty() ? RunConfig() : RunConfig::from_file(config_path_);
        for (const auto& [option, apply] : appliers_) {
            if (option->count() > 0) apply(cfg, staged_);
        }
        return cfg;
    }

private:
    CLI::App* app_;
    std::string config_path_;
    RunConfig staged_;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&, const RunConfig&)>>>
        appliers_;
};

void add_model_options(ConfigBinder& b) {
    b.opt("--window", &RunConfig::window, "window size w");
    b.opt("--stride-train", &RunConfig::stride_train, "training stride (0 = window size)");
    b.opt("--stride-test", &RunConfig::stride_test, "test stride (0 = window size)");
    b.opt("--hidden", &RunConfig::hidden, "hidden width (0 = 2*latent)");
    b.opt("--latent", &RunConfig::latent, "latent width d");
    b.opt("--epochs", &RunConfig::epochs, "offline training epochs");
    b.opt("--batch", &RunConfig::batch_size, "offline batch size");
    b.opt("--lr", &RunConfig::lr, "offline learning rate (Adam)");
    b.opt("--seed", &RunConfig::seed, "model init / shuffle seed");
}

void add_stream_options(ConfigBinder& b) {
    b.opt("--gamma", &RunConfig::gamma, "EMA retention rate");
    b.opt("--eta", &RunConfig::eta, "test-time learning rate");
    b.opt("--threshold", &RunConfig::threshold, "qP | oracle | fixed:X");
    b.flag("--detrend,!--no-detrend", &RunConfig::use_detrend, "detrend module (DT)");
    b.flag("--adapt,!--no-adapt", &RunConfig::use_tta, "test-time adaptation (TTA)");
}

void add_synth_options(ConfigBinder& b) {
    b.synth_opt("--length-train", &tsadapt::SyntheticSpec::length_train, "train length");
    b.synth_opt("--length-test", &tsadapt::SyntheticSpec::length_test, "test length");
    b.synth_opt("--period", &tsadapt::SyntheticSpec::period, "sinusoid period");
    b.synth_opt("--amplitude", &tsadapt::SyntheticSpec::amplitude, "sinusoid amplitude");
    b.synth_opt("--shift-at", &tsadapt::SyntheticSpec::shift_at, "test-local shift timestep");
    b.synth_opt("--shift-magnitude", &tsadapt::SyntheticSpec::shift_magnitude,
                "level shift size");
    b.synth_opt("--anomaly-count", &tsadapt::SyntheticSpec::anomaly_count, "injected spikes");
    b.synth_opt("--anomaly-magnitude", &tsadapt::SyntheticSpec::anomaly_magnitude,
                "spike size");
    b.synth_opt("--noise-std", &tsadapt::SyntheticSpec::noise_std, "gaussian noise level");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming time-series anomaly detection with trend-aware test-time "
                 "adaptation"};
    app.require_subcommand(1);

    std::vector<std::pair<ConfigBinder*, std::function<void(const RunConfig&)>>> dispatch;

    CLI::App* train = app.add_subcommand("train", "fit the autoencoder on normal data");
    ConfigBinder train_b(train);
    train_b.opt("--train", &RunConfig::train_path, "training CSV");
    train_b.opt("--out", &RunConfig::out_dir, "output directory");
    add_model_options(train_b);
    train_b.flag("--scale,!--no-scale", &RunConfig::standardize, "standardize with train stats");
    train_b.flag("--synthetic", &RunConfig::use_synthetic, "use the generator instead of CSVs");
    add_synth_options(train_b);
    train_b.synth_opt("--synth-seed", &tsadapt::SyntheticSpec::seed, "generator seed");
    dispatch.emplace_back(&train_b, tsadapt::cmd_train);

    CLI::App* detect = app.add_subcommand("detect", "stream test data through the detector");
    ConfigBinder detect_b(detect);
    detect_b.opt("--test", &RunConfig::test_path, "test CSV (label column optional)");
    detect_b.opt("--checkpoint", &RunConfig::checkpoint_path, "checkpoint from train");
    detect_b.opt("--out", &RunConfig::out_dir, "output directory");
    add_model_options(detect_b);
    add_stream_options(detect_b);
    detect_b.flag("--synthetic", &RunConfig::use_synthetic, "use the generator instead of CSVs");
    add_synth_options(detect_b);
    detect_b.synth_opt("--synth-seed", &tsadapt::SyntheticSpec::seed, "generator seed");
    dispatch.emplace_back(&detect_b, tsadapt::cmd_detect);

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a detection run");
    ConfigBinder evaluate_b(evaluate);
    evaluate_b.opt("--scores", &RunConfig::scores_path, "CSV with a 'score' column");
    evaluate_b.opt("--labels", &RunConfig::labels_path, "CSV with a 'label' column");
    evaluate_b.opt("--train-scores", &RunConfig::train_scores_path,
                   "train scores CSV for qP thresholds");
    evaluate_b.opt("--checkpoint", &RunConfig::checkpoint_path,
                   "checkpoint holding train scores");
    evaluate_b.opt("--threshold", &RunConfig::threshold, "qP | oracle | fixed:X");
    evaluate_b.opt("--out", &RunConfig::out_dir, "output directory");
    dispatch.emplace_back(&evaluate_b, tsadapt::cmd_evaluate);

    CLI::App* ablate = app.add_subcommand("ablate", "run the DT/TTA ablation grid");
    ConfigBinder ablate_b(ablate);
    ablate_b.opt("--train", &RunConfig::train_path, "training CSV");
    ablate_b.opt("--test", &RunConfig::test_path, "labeled test CSV");
    ablate_b.opt("--out", &RunConfig::out_dir, "output directory");
    ablate_b.opt("--seeds", &RunConfig::seeds, "trial seeds")->delimiter(',');
    add_model_options(ablate_b);
    add_stream_options(ablate_b);
    ablate_b.flag("--scale,!--no-scale", &RunConfig::standardize,
                  "standardize with train stats");
    ablate_b.flag("--synthetic", &RunConfig::use_synthetic, "use the generator instead of CSVs");
    add_synth_options(ablate_b);
    ablate_b.synth_opt("--synth-seed", &tsadapt::SyntheticSpec::seed, "generator seed");
    dispatch.emplace_back(&ablate_b, tsadapt::cmd_ablate);

    CLI::App* synth = app.add_subcommand("synth", "write synthetic train/test CSVs");
    ConfigBinder synth_b(synth);
    synth_b.opt("--out", &RunConfig::out_dir, "output directory");
    add_synth_options(synth_b);
    synth_b.synth_opt("--seed", &tsadapt::SyntheticSpec::seed, "generator seed");
    dispatch.emplace_back(&synth_b, tsadapt::cmd_synth);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const std::size_t index = [&] {
            const CLI::App* sub = app.get_subcommands().front();
            if (sub == train) return std::size_t{0};
            if (sub == detect) return std::size_t{1};
            if (sub == evaluate) return std::size_t{2};
            if (sub == ablate) return std::size_t{3};
            return std::size_t{4};
        }();
        dispatch[index].second(dispatch[index].first->resolve());
    } catch (const tsadapt::NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 1;
    } catch (const tsadapt::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
