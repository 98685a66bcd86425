#include <cstring>
#include <fstream>
#include <map>

#include "skipgan/config_json.hpp"
#include "skipgan/errors.hpp"
#include "skipgan/trainer.hpp"

namespace skipgan {

namespace {

constexpr char kMagic[] = "SKGCKPT1";     // 8 bytes
constexpr char kEndMagic[] = "SKGCKEND";  // 8 bytes

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw IoError("truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_double(std::ostream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(out, bits);
}

double read_double(std::istream& in) {
    std::uint64_t bits = read_u64(in);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

void append_params(std::vector<std::pair<std::string, std::vector<double>>>& arrays,
                   const std::vector<ParamRef>& params) {
    for (const auto& p : params) arrays.emplace_back(p.name, p.value->vec());
}

void append_state(std::vector<std::pair<std::string, std::vector<double>>>& arrays,
                  const std::vector<StateRef>& state) {
    for (const auto& s : state) arrays.emplace_back(s.name, s.value->vec());
}

void append_optimizer(std::vector<std::pair<std::string, std::vector<double>>>& arrays,
                      const std::string& prefix, const Adam& opt) {
    arrays.emplace_back(prefix + ".t",
                        std::vector<double>{static_cast<double>(opt.step_count())});
    arrays.emplace_back(prefix + ".lr", std::vector<double>{opt.learning_rate()});
    const auto& params = opt.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        arrays.emplace_back(prefix + ".m." + params[i].name, opt.first_moments()[i]);
        arrays.emplace_back(prefix + ".v." + params[i].name, opt.second_moments()[i]);
    }
}

class ArrayIndex {
public:
    explicit ArrayIndex(const Checkpoint& c) {
        for (const auto& [name, values] : c.arrays) index_.emplace(name, &values);
    }

    const std::vector<double>& get(const std::string& name, std::size_t expected) const {
        auto it = index_.find(name);
        if (it == index_.end())
            throw ConfigError("checkpoint does not match the model configuration (missing '" +
                              name + "')");
        if (it->second->size() != expected)
            throw ConfigError("checkpoint does not match the model configuration ('" + name +
                              "' has " + std::to_string(it->second->size()) + " values, expected " +
                              std::to_string(expected) + ")");
        return *it->second;
    }

private:
    std::map<std::string, const std::vector<double>*> index_;
};

void restore_params(const ArrayIndex& index, const std::vector<ParamRef>& params) {
    for (const auto& p : params) p.value->vec() = index.get(p.name, p.value->size());
}

void restore_state(const ArrayIndex& index, const std::vector<StateRef>& state) {
    for (const auto& s : state) s.value->vec() = index.get(s.name, s.value->size());
}

void restore_optimizer(const ArrayIndex& index, const std::string& prefix, Adam& opt) {
    opt.set_step_count(static_cast<std::int64_t>(index.get(prefix + ".t", 1)[0]));
    opt.set_learning_rate(index.get(prefix + ".lr", 1)[0]);
    const auto& params = opt.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        opt.first_moments()[i] = index.get(prefix + ".m." + params[i].name, params[i].value->size());
        opt.second_moments()[i] =
            index.get(prefix + ".v." + params[i].name, params[i].value->size());
    }
}

}  // namespace

Checkpoint capture_checkpoint(Generator& g, Discriminator& d, const Adam& opt_g,
                              const Adam& opt_d, const TrainConfig& train_config, int epoch,
                              double best_metric, const Rng& rng) {
    Checkpoint c;
    c.gen_config = g.config();
    c.train_config = train_config;
    c.epoch = epoch;
    c.best_metric = best_metric;
    c.rng_state = rng.save_state();
    append_params(c.arrays, g.parameters());
    append_state(c.arrays, g.state());
    append_params(c.arrays, d.parameters());
    append_state(c.arrays, d.state());
    append_optimizer(c.arrays, "optimizer.g", opt_g);
    append_optimizer(c.arrays, "optimizer.d", opt_d);
    return c;
}

void restore_checkpoint(const Checkpoint& c, Generator& g, Discriminator& d, Adam* opt_g,
                        Adam* opt_d, Rng* rng) {
    if (c.gen_config != g.config() || c.gen_config != d.config())
        throw ConfigError("checkpoint was produced by a different model configuration");
    ArrayIndex index(c);
    restore_params(index, g.parameters());
    restore_state(index, g.state());
    restore_params(index, d.parameters());
    restore_state(index, d.state());
    if (opt_g) restore_optimizer(index, "optimizer.g", *opt_g);
    if (opt_d) restore_optimizer(index, "optimizer.d", *opt_d);
    if (rng) rng->restore_state(c.rng_state);
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint file '" + path + "'");

    nlohmann::json manifest;
    manifest["format_version"] = c.format_version;
    manifest["generator_config"] = c.gen_config;
    manifest["train_config"] = c.train_config;
    manifest["epoch"] = c.epoch;
    manifest["rng_state"] = c.rng_state;
    auto& dir = manifest["arrays"] = nlohmann::json::array();
    std::uint64_t total = 0;
    for (const auto& [name, values] : c.arrays) {
        dir.push_back({{"name", name}, {"size", values.size()}});
        total += values.size();
    }
    const std::string text = manifest.dump();

    out.write(kMagic, 8);
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_double(out, c.best_metric);
    write_u64(out, total);
    for (const auto& [name, values] : c.arrays)
        for (double v : values) write_double(out, v);
    out.write(kEndMagic, 8);
    if (!out) throw IoError("failed while writing checkpoint file '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint file '" + path + "'");

    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw IoError("'" + path + "' is not a checkpoint file");

    const std::uint64_t manifest_len = read_u64(in);
    if (manifest_len > (1u << 30)) throw IoError("corrupt checkpoint manifest");
    std::string text(manifest_len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(manifest_len));
    if (!in) throw IoError("truncated checkpoint");

    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("corrupt checkpoint manifest: ") + e.what());
    }

    Checkpoint c;
    try {
        c.format_version = manifest.at("format_version").get<int>();
        if (c.format_version != 1)
            throw IoError("unsupported checkpoint version " + std::to_string(c.format_version));
        c.gen_config = manifest.at("generator_config").get<GeneratorConfig>();
        c.train_config = manifest.at("train_config").get<TrainConfig>();
        c.epoch = manifest.at("epoch").get<int>();
        c.rng_state = manifest.at("rng_state").get<std::string>();
        for (const auto& entry : manifest.at("arrays")) {
            c.arrays.emplace_back(entry.at("name").get<std::string>(),
                                  std::vector<double>(entry.at("size").get<std::size_t>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("corrupt checkpoint manifest: ") + e.what());
    }

    c.best_metric = read_double(in);
    const std::uint64_t total = read_u64(in);
    std::uint64_t expected = 0;
    for (const auto& [name, values] : c.arrays) expected += values.size();
    if (total != expected) throw IoError("corrupt checkpoint array directory");
    for (auto& [name, values] : c.arrays)
        for (auto& v : values) v = read_double(in);

    char end[8];
    in.read(end, 8);
    if (!in || std::memcmp(end, kEndMagic, 8) != 0) throw IoError("truncated checkpoint");
    return c;
}

}  // namespace skipgan
