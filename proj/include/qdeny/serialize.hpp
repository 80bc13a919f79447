#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdeny/common.hpp"
#include "qdeny/deniable.hpp"
#include "qdeny/family.hpp"
#include "qdeny/lattice_ntcf.hpp"
#include "qdeny/unexplainable.hpp"

namespace qdeny::io {

using json = nlohmann::json;

/// Concatenates fixed-width little-endian fields into one byte string.
inline std::string pack_bits(const std::vector<Word> &values, unsigned width) {
    std::vector<std::uint8_t> bytes((values.size() * width + 7) / 8, 0);
    std::size_t pos = 0;
    for (Word v : values) {
        for (unsigned i = 0; i < width; i++, pos++) {
            if (bit_of(v, i)) bytes[pos / 8] |= static_cast<std::uint8_t>(1u << (pos % 8));
        }
    }
    return bytes_to_hex(bytes);
}

inline std::vector<Word> unpack_bits(const std::string &hex, std::size_t count, unsigned width) {
    auto bytes = hex_to_bytes(hex);
    if (bytes.size() != (count * width + 7) / 8) throw ParameterError("packed field has wrong length");
    std::vector<Word> out(count, 0);
    std::size_t pos = 0;
    for (std::size_t j = 0; j < count; j++) {
        for (unsigned i = 0; i < width; i++, pos++) {
            if ((bytes[pos / 8] >> (pos % 8)) & 1) out[j] |= Word{1} << i;
        }
    }
    for (; pos < bytes.size() * 8; pos++) {
        if ((bytes[pos / 8] >> (pos % 8)) & 1) throw ParameterError("packed field has nonzero padding");
    }
    return out;
}

inline json to_json(const lattice::LatticeParams &p) {
    return {{"name", p.name}, {"ring_n", p.ring_n}, {"q", p.q}, {"m", p.m}, {"secret_width", p.secret_width}, {"image_width", p.image_width}};
}

inline lattice::LatticeParams lattice_params_from_json(const json &j) {
    static const std::vector<std::string> fields{"name", "ring_n", "q", "m", "secret_width", "image_width"};
    for (const auto &[k, v] : j.items()) {
        if (std::find(fields.begin(), fields.end(), k) == fields.end()) throw ParameterError("unknown lattice parameter '" + k + "'");
    }
    lattice::LatticeParams p;
    p.name = j.value("name", p.name);
    p.ring_n = j.value("ring_n", p.ring_n);
    p.q = j.value("q", p.q);
    p.m = j.value("m", p.m);
    p.secret_width = j.value("secret_width", p.secret_width);
    p.image_width = j.value("image_width", p.image_width);
    p.validate();
    return p;
}

inline std::string ring_hex(const lattice::Coeffs &c, std::int64_t q) {
    std::string out;
    for (auto v : c) out += to_hex(static_cast<Word>(lattice::mod_q(v, q)), 32);
    return out;
}

inline lattice::Coeffs ring_from_hex(const std::string &hex, const lattice::LatticeParams &p) {
    if (hex.size() != 8 * p.ring_n) throw ParameterError("ring element hex has wrong length");
    lattice::Coeffs c;
    for (std::size_t i = 0; i < hex.size(); i += 8) {
        auto v = static_cast<std::int64_t>(from_hex(hex.substr(i, 8), 32));
        if (v >= p.q) throw ParameterError("ring coefficient not reduced mod q");
        c.push_back(v);
    }
    return c;
}

inline json ring_vec_json(const std::vector<lattice::Coeffs> &v, std::int64_t q) {
    json out = json::array();
    for (const auto &c : v) out.push_back(ring_hex(c, q));
    return out;
}

inline std::vector<lattice::Coeffs> ring_vec_from_json(const json &j, const lattice::LatticeParams &p, std::size_t expected) {
    if (!j.is_array() || j.size() != expected) throw ParameterError("ring vector has wrong length");
    std::vector<lattice::Coeffs> out;
    for (const auto &e : j) out.push_back(ring_from_hex(e.get<std::string>(), p));
    return out;
}

inline json to_json(const PublicKey &pk) {
    json j{{"family", tcf::family_name(pk.family)}};
    if (pk.is_lattice()) {
        j["params"] = to_json(pk.lat.params);
        j["a"] = ring_vec_json(pk.lat.a, pk.lat.params.q);
        j["u"] = ring_vec_json(pk.lat.u, pk.lat.params.q);
    } else {
        j["n"] = pk.toy.n;
        j["payload"] = bytes_to_hex(pk.toy.payload());
    }
    return j;
}

inline PublicKey public_key_from_json(const json &j) {
    PublicKey pk;
    pk.family = tcf::parse_family(j.at("family").get<std::string>());
    if (pk.is_lattice()) {
        pk.lat.params = lattice_params_from_json(j.at("params"));
        pk.lat.a = ring_vec_from_json(j.at("a"), pk.lat.params, pk.lat.params.m);
        pk.lat.u = ring_vec_from_json(j.at("u"), pk.lat.params, pk.lat.params.m);
    } else {
        pk.toy = tcf::TcfKey::from_payload(pk.family, j.at("n").get<unsigned>(), hex_to_bytes(j.at("payload").get<std::string>()));
    }
    return pk;
}

inline json to_json(const SecretKey &sk) {
    json j{{"public", to_json(sk.pk)}};
    if (sk.pk.is_lattice()) {
        auto q = sk.pk.lat.params.q;
        j["trapdoor"] = {{"r0", ring_vec_json(sk.lat.r0, q)}, {"r1", ring_vec_json(sk.lat.r1, q)}, {"s", ring_hex(sk.lat.s, q)}, {"e", ring_vec_json(sk.lat.e, q)}};
    } else {
        j["trapdoor"] = {{"claw_offset", to_hex(sk.toy.claw_offset, sk.pk.toy.n)}};
    }
    return j;
}

inline SecretKey secret_key_from_json(const json &j) {
    SecretKey sk;
    sk.pk = public_key_from_json(j.at("public"));
    const auto &t = j.at("trapdoor");
    if (sk.pk.is_lattice()) {
        const auto &p = sk.pk.lat.params;
        sk.lat.r0 = ring_vec_from_json(t.at("r0"), p, p.digits());
        sk.lat.r1 = ring_vec_from_json(t.at("r1"), p, p.digits());
        sk.lat.s = ring_from_hex(t.at("s").get<std::string>(), p);
        sk.lat.e = ring_vec_from_json(t.at("e"), p, p.m);
        for (auto &c : sk.lat.e)
            for (auto &v : c) v = lattice::centered(v, p.q);
    } else {
        sk.toy.key = sk.pk.toy;
        sk.toy.key_id = sk.pk.toy.id();
        sk.toy.claw_offset = from_hex(t.at("claw_offset").get<std::string>(), sk.pk.toy.n);
    }
    return sk;
}

inline json to_json(const PublicKey &pk, const deniable::DeniableCiphertext &c) {
    return {{"scheme", "deniable"}, {"z", to_hex(c.z, 1)}, {"d", pack_bits({c.d}, pk.preimage_bits())}, {"y", image_hex(pk, c.y)}};
}

inline deniable::DeniableCiphertext deniable_from_json(const PublicKey &pk, const json &j) {
    if (j.value("scheme", "deniable") != "deniable") throw ParameterError("not a deniable ciphertext");
    deniable::DeniableCiphertext c;
    c.z = static_cast<unsigned>(from_hex(j.at("z").get<std::string>(), 1));
    c.d = unpack_bits(j.at("d").get<std::string>(), 1, pk.preimage_bits()).at(0);
    c.y = image_from_hex(pk, j.at("y").get<std::string>());
    return c;
}

inline json to_json(const PublicKey &pk, const unexp::ParallelCiphertext &c) {
    std::vector<Word> z(c.z_prime.begin(), c.z_prime.end());
    json ys = json::array();
    for (const auto &y : c.y) ys.push_back(image_hex(pk, y));
    return {{"scheme", "unexp"}, {"L", c.size()}, {"z_prime", pack_bits(z, 1)}, {"d", pack_bits(c.d, pk.preimage_bits())}, {"y", ys}};
}

inline unexp::ParallelCiphertext unexp_from_json(const PublicKey &pk, const json &j) {
    if (j.value("scheme", "") != "unexp") throw ParameterError("not an unexplainable ciphertext");
    auto L = j.at("L").get<std::size_t>();
    if (L == 0 || L > unexp::kMaxRepetitionsConcrete) throw ParameterError("repetition count out of range");
    unexp::ParallelCiphertext c;
    for (Word z : unpack_bits(j.at("z_prime").get<std::string>(), L, 1)) c.z_prime.push_back(static_cast<unsigned>(z));
    c.d = unpack_bits(j.at("d").get<std::string>(), L, pk.preimage_bits());
    const auto &ys = j.at("y");
    if (!ys.is_array() || ys.size() != L) throw ParameterError("image list length differs from L");
    for (const auto &y : ys) c.y.push_back(image_from_hex(pk, y.get<std::string>()));
    return c;
}

}  // namespace qdeny::io
