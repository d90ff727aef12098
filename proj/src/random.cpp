#include "lgbandit/random.hpp"

#include <cmath>
#include <numbers>

namespace lgb {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_tag(std::string_view name)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t p : parts) {
        h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    }
    return h;
}

namespace {

double to_open_unit(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double box_muller(double u1, double u2)
{
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

double counter_normal(std::uint64_t key, std::uint64_t a, std::uint64_t b)
{
    const std::uint64_t base = derive_seed(key, {a, b});
    return box_muller(to_open_unit(splitmix64(base)), to_open_unit(splitmix64(base ^ 0xd1b54a32d192ed03ULL)));
}

double RandomStream::uniform()
{
    return to_open_unit(engine_());
}

double RandomStream::normal()
{
    const double u1 = uniform();
    const double u2 = uniform();
    return box_muller(u1, u2);
}

std::size_t RandomStream::index(std::size_t n)
{
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % n);
}

}  // namespace lgb
