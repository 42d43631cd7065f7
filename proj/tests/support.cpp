#include "support.hpp"

#include <map>
#include <mutex>
#include <tuple>

namespace testsupport {

const vsig::KeyMaterial& test_keys(uint16_t parties, int bits, uint8_t algorithm) {
    static std::mutex mu;
    static std::map<std::tuple<uint16_t, int, uint8_t>, vsig::KeyMaterial> cache;
    std::lock_guard lock(mu);
    auto key = std::make_tuple(parties, bits, algorithm);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, vsig::generate_key_material(0xC0FFEE, parties, bits, algorithm)).first;
    return it->second;
}

}  // namespace testsupport
