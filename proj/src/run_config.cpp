#include "tsadapt/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tsadapt/errors.hpp"
#include "tsadapt/num_format.hpp"

namespace tsadapt {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto result = std::from_chars(text.data(), text.data() + text.size(), v);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
        throw InvalidInput("config: key '" + key + "': cannot parse '" + text +
                           "' as an unsigned integer");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw InvalidInput("config: key '" + key + "': expected true or false, got '" + text + "'");
}

std::vector<std::uint64_t> parse_u64_list(const std::string& key, const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_u64(key, item));
    }
    if (out.empty()) {
        throw InvalidInput("config: key '" + key + "': empty list");
    }
    return out;
}

} // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open config file: " + path);
    }
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput("config: " + path + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));

        if (key == "train") cfg.train_path = value;
        else if (key == "test") cfg.test_path = value;
        else if (key == "checkpoint") cfg.checkpoint_path = value;
        else if (key == "out") cfg.out_dir = value;
        else if (key == "scores") cfg.scores_path = value;
        else if (key == "labels") cfg.labels_path = value;
        else if (key == "train_scores") cfg.train_scores_path = value;
        else if (key == "window") cfg.window = parse_u64(key, value);
        else if (key == "stride_train") cfg.stride_train = parse_u64(key, value);
        else if (key == "stride_test") cfg.stride_test = parse_u64(key, value);
        else if (key == "hidden") cfg.hidden = parse_u64(key, value);
        else if (key == "latent") cfg.latent = parse_u64(key, value);
        else if (key == "gamma") cfg.gamma = parse_double(value);
        else if (key == "eta") cfg.eta = parse_double(value);
        else if (key == "threshold") cfg.threshold = value;
        else if (key == "epochs") cfg.epochs = parse_u64(key, value);
        else if (key == "batch") cfg.batch_size = parse_u64(key, value);
        else if (key == "lr") cfg.lr = parse_double(value);
        else if (key == "seed") cfg.seed = parse_u64(key, value);
        else if (key == "seeds") cfg.seeds = parse_u64_list(key, value);
        else if (key == "detrend") cfg.use_detrend = parse_bool(key, value);
        else if (key == "adapt") cfg.use_tta = parse_bool(key, value);
        else if (key == "scale") cfg.standardize = parse_bool(key, value);
        else if (key == "synthetic") cfg.use_synthetic = parse_bool(key, value);
        else if (key == "length_train") cfg.synth.length_train = parse_u64(key, value);
        else if (key == "length_test") cfg.synth.length_test = parse_u64(key, value);
        else if (key == "period") cfg.synth.period = parse_u64(key, value);
        else if (key == "amplitude") cfg.synth.amplitude = parse_double(value);
        else if (key == "shift_at") cfg.synth.shift_at = parse_u64(key, value);
        else if (key == "shift_magnitude") cfg.synth.shift_magnitude = parse_double(value);
        else if (key == "anomaly_count") cfg.synth.anomaly_count = parse_u64(key, value);
        else if (key == "anomaly_magnitude") cfg.synth.anomaly_magnitude = parse_double(value);
        else if (key == "noise_std") cfg.synth.noise_std = parse_double(value);
        else if (key == "synth_seed") cfg.synth.seed = parse_u64(key, value);
        else {
            throw InvalidInput("config: " + path + ":" + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

void RunConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw InvalidInput("cannot open config file for writing: " + path);
    }
    out << "train = " << train_path << '\n';
    out << "test = " << test_path << '\n';
    out << "checkpoint = " << checkpoint_path << '\n';
    out << "out = " << out_dir << '\n';
    out << "scores = " << scores_path << '\n';
    out << "labels = " << labels_path << '\n';
    out << "train_scores = " << train_scores_path << '\n';
    out << "window = " << window << '\n';
    out << "stride_train = " << stride_train << '\n';
    out << "stride_test = " << stride_test << '\n';
    out << "hidden = " << hidden << '\n';
    out << "latent = " << latent << '\n';
    out << "gamma = " << format_double(gamma) << '\n';
    out << "eta = " << format_double(eta) << '\n';
    out << "threshold = " << threshold << '\n';
    out << "epochs = " << epochs << '\n';
    out << "batch = " << batch_size << '\n';
    out << "lr = " << format_double(lr) << '\n';
    out << "seed = " << seed << '\n';
    out << "seeds = ";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i > 0) out << ',';
        out << seeds[i];
    }
    out << '\n';
    out << "detrend = " << (use_detrend ? "true" : "false") << '\n';
    out << "adapt = " << (use_tta ? "true" : "false") << '\n';
    out << "scale = " << (standardize ? "true" : "false") << '\n';
    out << "synthetic = " << (use_synthetic ? "true" : "false") << '\n';
    out << "length_train = " << synth.length_train << '\n';
    out << "length_test = " << synth.length_test << '\n';
    out << "period = " << synth.period << '\n';
    out << "amplitude = " << format_double(synth.amplitude) << '\n';
    out << "shift_at = " << synth.shift_at << '\n';
    out << "shift_magnitude = " << format_double(synth.shift_magnitude) << '\n';
    out << "anomaly_count = " << synth.anomaly_count << '\n';
    out << "anomaly_magnitude = " << format_double(synth.anomaly_magnitude) << '\n';
    out << "noise_std = " << format_double(synth.noise_std) << '\n';
    out << "synth_seed = " << synth.seed << '\n';
    if (!out) {
        throw InvalidInput("config write failed: " + path);
    }
}

} // namespace tsadapt
