#pragma once

#include <string>

#include "mpe/trajectory.hpp"

namespace mpe {

// ---------------------------------------------------------------------------
// Dataset serialization.
//
// JSONL layout: the first line is a meta record
//   {"type":"mpe.dataset","horizon":T,"covariate_dim":p,"gamma":g}
// followed by one trajectory record per line:
//   {"unit_id":int,"X":[[f64;p];T+1],"A":[f64;T],"R":[f64;T]}
// Doubles round-trip bit-exactly. Parse errors report the offending line.
//
// CSV layout (long format, for external analysis): header
//   unit_id,t,x_1..x_p,a,r
// with one row per stage t = 1..T+1; the terminal row carries X_{T+1} and
// empty a/r fields.
// ---------------------------------------------------------------------------

void write_jsonl(const Dataset& ds, const std::string& path);
Dataset read_jsonl(const std::string& path);

// write + read, asserting nothing; callers compare against the original.
Dataset dataset_roundtrip(const Dataset& ds, const std::string& path);

void write_csv(const Dataset& ds, const std::string& path);

// Bitwise equality of shapes and payloads (no tolerance).
bool datasets_equal(const Dataset& a, const Dataset& b);

}  // namespace mpe
