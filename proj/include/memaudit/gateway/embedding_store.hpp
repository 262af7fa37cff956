#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace memaudit::gateway {

/// One embedding per input text, row-major.
struct EmbeddingMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> values;
    /// SHA-256 hex of each row's input text.
    std::vector<std::string> input_hashes;

    const double* row(std::size_t i) const { return values.data() + i * dim; }
    /// Throws PreconditionError when shape or finiteness is violated.
    void validate() const;
    bool operator==(const EmbeddingMatrix&) const = default;
};

/// Binary layout: "MAEMB1\0\0", u64 rows, u64 dim, then per row the 32-byte
/// input hash followed by `dim` little-endian doubles. A sibling CSV manifest
/// `<path>.csv` lists `row,input_hash`.
void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

}  // namespace memaudit::gateway
