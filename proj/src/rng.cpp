#include "plcprov/rng.hpp"

namespace plcprov {

uint64_t fnv1a64(uint64_t h, std::string_view data) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64(std::string_view data) {
    return fnv1a64(0xcbf29ce484222325ull, data);
}

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double unit_interval(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

double gauss_draw(uint64_t seed, std::string_view key, uint64_t tick) {
    uint64_t stream = mix64(seed ^ mix64(fnv1a64(key)) ^ mix64(tick * 0x9e3779b97f4a7c15ull));
    std::mt19937_64 engine(stream);
    double sum = 0.0;
    for (int i = 0; i < 12; ++i) sum += unit_interval(engine);
    return sum - 6.0;
}

}  // namespace plcprov
