#pragma once

#include "iot2vec/matrix.hpp"
#include "iot2vec/vocab.hpp"

namespace iot2vec {

struct Corpus;

struct PmiMatrix {
    Vocabulary vocab;  // row/column order
    MatD values;       // V x V
};

/// Brute-force co-occurrence oracle: exhaustively counts directed pairs with
/// the same (un-shrunk) windowing rule as training and returns
/// PMI(a,b) = log[count(a,b) * T / (count(a) * count(b))] with T the total
/// directed pair count. Cells with zero co-occurrence get the matrix minimum.
/// Intended for small vocabularies (V up to a few hundred); used to verify
/// that trained embeddings recover co-occurrence structure.
PmiMatrix pmi_oracle(const Corpus& corpus, int window);

}  // namespace iot2vec
