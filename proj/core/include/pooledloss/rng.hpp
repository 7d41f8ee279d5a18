#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace pooledloss {

// splitmix64 finalizer; used both as a seed derivation hash and as the
// output function of the counter engine below.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derives statistically independent substream seeds from (master, salt...)
// tuples so that results do not depend on thread count or evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> salts) {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t v : salts) s = splitmix64(s ^ (v + 0x9E3779B97F4A7C15ULL));
    return s;
}

// Stream salt tags. Values are part of the reproducibility contract.
namespace salt {
inline constexpr std::uint64_t kPath = 0x01;
inline constexpr std::uint64_t kSystematic = 0x02;
inline constexpr std::uint64_t kName = 0x03;
inline constexpr std::uint64_t kMartingale = 0x04;
inline constexpr std::uint64_t kSkeleton = 0x05;
inline constexpr std::uint64_t kMacro = 0x06;
inline constexpr std::uint64_t kType = 0x07;
}  // namespace salt

// Counter-based generator with the splitmix64 output function. O(1) to
// construct, which matters when a simulation spawns one stream per name
// per path.
class Splitmix64Engine {
public:
    using result_type = std::uint64_t;

    explicit Splitmix64Engine(std::uint64_t seed = 0) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t state_;
};

// Engine plus normal/exponential draw state. normal_distribution produces
// draws in pairs, so engine and distribution travel together.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double exponential() { return exponential_(engine_); }
    Splitmix64Engine& engine() { return engine_; }

private:
    Splitmix64Engine engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::exponential_distribution<double> exponential_{1.0};
};

inline NormalStream make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> salts) {
    return NormalStream(derive_seed(master, salts));
}

}  // namespace pooledloss
