#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dataio.hpp"

namespace adarnn {

// Synthetic series with temporal covariate shift: regime k offsets the
// feature means by k * delta and widens the innovations, while one global
// linear map ties the target to the features in every regime, so the
// marginals move and the conditional stays put.
struct SynthSpec {
    std::size_t regimes = 3;
    std::size_t steps_per_regime = 1500;
    std::size_t features = 4;
    double delta = 4.0;
    std::uint64_t seed = 0;
};

struct SynthResult {
    RawTable table;                      // columns f0..f{p-1}, y; time 0..n-1
    std::vector<std::size_t> change_rows; // first row of each regime after the first
    SynthSpec spec;
};

SynthResult synth_tcs_generate(const SynthSpec& spec);

// CSV with header time,f0,...,y; values in shortest round-trip form.
void write_synth_csv(const SynthResult& synth, const std::string& path);

// Ground-truth boundaries as JSON, written next to the CSV.
std::string synth_truth_json(const SynthResult& synth);

} // namespace adarnn
