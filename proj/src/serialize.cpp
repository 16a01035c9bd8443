#include "tsadapt/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "tsadapt/errors.hpp"

namespace tsadapt {

namespace {

constexpr std::uint8_t kMagic[4] = {'T', 'S', 'A', 'D'};
constexpr std::uint8_t kFormatVersion = 1;
constexpr std::uint8_t kKindCheckpoint = 1;
constexpr std::uint8_t kKindSnapshot = 2;

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void f64_vec(const std::vector<double>& v) {
        u64(v.size());
        for (double x : v) f64(x);
    }

    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::vector<double> f64_vec() {
        const std::uint64_t n = u64();
        need_elements(n, 8);
        std::vector<double> v(static_cast<std::size_t>(n));
        for (std::uint64_t i = 0; i < n; ++i) v[i] = f64();
        return v;
    }

    bool done() const { return pos_ == bytes_.size(); }

    std::uint64_t remaining() const { return bytes_.size() - pos_; }

private:
    // overflow-safe: compares against the remaining byte count
    void need(std::uint64_t n) const {
        if (n > bytes_.size() - pos_) {
            throw InvalidInput("corrupt container: truncated payload");
        }
    }

    void need_elements(std::uint64_t count, std::uint64_t size) const {
        if (count > (bytes_.size() - pos_) / size) {
            throw InvalidInput("corrupt container: truncated payload");
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

void write_header(Writer& w, std::uint8_t kind) {
    for (std::uint8_t b : kMagic) w.u8(b);
    w.u8(kFormatVersion);
    w.u8(kind);
}

void read_header(Reader& r, std::uint8_t expected_kind) {
    for (std::uint8_t b : kMagic) {
        if (r.u8() != b) throw InvalidInput("corrupt container: bad magic");
    }
    const std::uint8_t version = r.u8();
    if (version != kFormatVersion) {
        throw InvalidInput("container version mismatch: got " + std::to_string(version) +
                           ", expected " + std::to_string(kFormatVersion));
    }
    const std::uint8_t kind = r.u8();
    if (kind != expected_kind) {
        throw InvalidInput("container kind mismatch: got " + std::to_string(kind) +
                           ", expected " + std::to_string(expected_kind));
    }
}

void write_model(Writer& w, const MlpAutoencoder& m) {
    w.u64(m.dims().window);
    w.u64(m.dims().features);
    w.u64(m.dims().hidden);
    w.u64(m.dims().latent);
    w.u64(m.seed());
    w.u64(m.layers().size());
    for (const Layer& layer : m.layers()) {
        w.u64(layer.weight.rows);
        w.u64(layer.weight.cols);
        for (double v : layer.weight.data) w.f64(v);
        w.f64_vec(layer.bias);
    }
}

MlpAutoencoder read_model(Reader& r) {
    ModelDims dims;
    dims.window = r.u64();
    dims.features = r.u64();
    dims.hidden = r.u64();
    dims.latent = r.u64();
    const std::uint64_t seed = r.u64();
    const std::uint64_t n_layers = r.u64();
    std::vector<Layer> layers;
    layers.reserve(n_layers);
    for (std::uint64_t l = 0; l < n_layers; ++l) {
        Layer layer;
        layer.weight.rows = r.u64();
        layer.weight.cols = r.u64();
        if (layer.weight.cols != 0 &&
            layer.weight.rows > r.remaining() / 8 / layer.weight.cols) {
            throw InvalidInput("corrupt container: truncated payload");
        }
        layer.weight.data.resize(layer.weight.rows * layer.weight.cols);
        for (double& v : layer.weight.data) v = r.f64();
        layer.bias = r.f64_vec();
        layers.push_back(std::move(layer));
    }
    return MlpAutoencoder(dims, seed, std::move(layers));
}

} // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
    Writer w;
    write_header(w, kKindCheckpoint);
    write_model(w, ckpt.model);
    w.f64_vec(ckpt.scaler.mean);
    w.f64_vec(ckpt.scaler.std_dev);
    w.f64_vec(ckpt.trend_init);
    w.f64_vec(ckpt.train_scores);
    return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    read_header(r, kKindCheckpoint);
    MlpAutoencoder model = read_model(r);
    Scaler scaler;
    scaler.mean = r.f64_vec();
    scaler.std_dev = r.f64_vec();
    std::vector<double> trend_init = r.f64_vec();
    std::vector<double> train_scores = r.f64_vec();
    if (!r.done()) throw InvalidInput("corrupt container: trailing bytes");
    return Checkpoint{std::move(model), std::move(scaler), std::move(trend_init),
                      std::move(train_scores)};
}

std::vector<std::uint8_t> snapshot(const AdaptationState& state) {
    Writer w;
    write_header(w, kKindSnapshot);
    write_model(w, state.model);
    w.f64_vec(state.trend.mu());
    w.f64(state.trend.gamma());
    w.f64(state.config.gamma);
    w.f64(state.config.eta);
    w.f64(state.config.tau);
    w.u64(state.config.window);
    w.u8(state.config.use_detrend ? 1 : 0);
    w.u8(state.config.use_tta ? 1 : 0);
    w.u64(state.windows_processed);
    return w.take();
}

AdaptationState restore(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    read_header(r, kKindSnapshot);
    MlpAutoencoder model = read_model(r);
    std::vector<double> mu = r.f64_vec();
    const double trend_gamma = r.f64();
    AdaptationConfig cfg;
    cfg.gamma = r.f64();
    cfg.eta = r.f64();
    cfg.tau = r.f64();
    cfg.window = r.u64();
    cfg.use_detrend = r.u8() != 0;
    cfg.use_tta = r.u8() != 0;
    const std::uint64_t processed = r.u64();
    if (!r.done()) throw InvalidInput("corrupt container: trailing bytes");
    AdaptationState state{std::move(model), TrendEstimator(std::move(mu), trend_gamma), cfg,
                          processed};
    return state;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InvalidInput("write failed: " + path);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw InvalidInput("cannot open file: " + path);
    const std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw InvalidInput("read failed: " + path);
    return bytes;
}

} // namespace tsadapt
