#include "skipgan/rng.hpp"

#include <sstream>

#include "skipgan/errors.hpp"

namespace skipgan {

std::string Rng::save_state() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
}

void Rng::restore_state(const std::string& state) {
    std::istringstream in(state);
    in >> engine_;
    if (in.fail()) throw IoError("invalid random generator state string");
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace skipgan
