#include "memaudit/gateway/embedding_store.hpp"

#include "memaudit/error.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace memaudit::gateway {

static_assert(std::endian::native == std::endian::little, "embedding store assumes little-endian");

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'A', 'E', 'M', 'B', '1', '\0', '\0'};

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::array<unsigned char, 32> hex_to_bytes(const std::string& hex) {
    std::array<unsigned char, 32> out{};
    if (hex.size() != 64) throw PreconditionError("input hash must be 64 hex characters");
    for (std::size_t i = 0; i < 32; ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw PreconditionError("input hash is not hex");
        out[i] = static_cast<unsigned char>(hi * 16 + lo);
    }
    return out;
}

std::string bytes_to_hex(const unsigned char* b) {
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < 32; ++i) {
        out.push_back(hex[b[i] >> 4]);
        out.push_back(hex[b[i] & 0x0f]);
    }
    return out;
}

}  // namespace

void EmbeddingMatrix::validate() const {
    if (values.size() != rows * dim) throw PreconditionError("embedding matrix size != rows * dim");
    if (input_hashes.size() != rows) throw PreconditionError("embedding matrix needs one input hash per row");
    for (double v : values) {
        if (!std::isfinite(v)) throw PreconditionError("embedding matrix contains a non-finite value");
    }
}

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    m.validate();
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(kMagic.data(), kMagic.size());
    const std::uint64_t rows = m.rows, dim = m.dim;
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    for (std::size_t r = 0; r < m.rows; ++r) {
        auto hash = hex_to_bytes(m.input_hashes[r]);
        out.write(reinterpret_cast<const char*>(hash.data()), hash.size());
        out.write(reinterpret_cast<const char*>(m.row(r)), static_cast<std::streamsize>(m.dim * sizeof(double)));
    }
    if (!out) throw DataError("write failed: '" + path.string() + "'");

    std::ofstream manifest(path.string() + ".csv", std::ios::binary | std::ios::trunc);
    manifest << "row,input_hash\n";
    for (std::size_t r = 0; r < m.rows; ++r) manifest << r << ',' << m.input_hashes[r] << '\n';
    if (!manifest) throw DataError("write failed: '" + path.string() + ".csv'");
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("embedding file not found: '" + path.string() + "'");
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw DataError("not an embedding file: '" + path.string() + "'");
    std::uint64_t rows = 0, dim = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&dim), sizeof dim);
    if (!in) throw DataError("truncated embedding header: '" + path.string() + "'");

    const auto expected = 24 + rows * (32 + dim * sizeof(double));
    if (std::filesystem::file_size(path) != expected) {
        throw DataError("embedding file size does not match its header: '" + path.string() + "'");
    }
    EmbeddingMatrix m;
    m.rows = rows;
    m.dim = dim;
    m.values.resize(rows * dim);
    for (std::size_t r = 0; r < rows; ++r) {
        std::array<unsigned char, 32> hash{};
        in.read(reinterpret_cast<char*>(hash.data()), hash.size());
        m.input_hashes.push_back(bytes_to_hex(hash.data()));
        in.read(reinterpret_cast<char*>(m.values.data() + r * dim), static_cast<std::streamsize>(dim * sizeof(double)));
    }
    if (!in) throw DataError("truncated embedding rows: '" + path.string() + "'");
    m.validate();
    return m;
}

}  // namespace memaudit::gateway
