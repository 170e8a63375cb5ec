// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "ssplat/synthetic.hpp"

namespace ssplat {

// Controlled pose/depth corruption for the oracle predictor; models the
// mismatch between ground-truth and predicted assembly poses without any
// trained weights in the loop.
struct OracleNoise {
    double rotation_deg = 0.0;     // sigma of the rotation angle, degrees
    double translation_frac = 0.0; // sigma as a fraction of the trajectory extent
    double depth_frac = 0.0;       // sigma of the multiplicative depth error
    uint64_t seed = 0;

    void validate() const;
};

struct OraclePrediction {
    std::vector<GaussianPrimitive> locals;  // camera-space Gaussians
    RigidPose pose;                         // predicted (noisy) pose
    Intrinsics intrinsics;                  // predicted = ground truth
};

// Stateless one-shot oracle: all ground-truth Gaussians visible from the
// view, mapped to camera space with the true pose, depths perturbed
// multiplicatively; zero noise inverts assembly exactly.
OraclePrediction oracle_predict(const SyntheticScene& scene, int view, const OracleNoise& noise);

// Streaming oracle: claims each Gaussian for the first view that sees it so
// a full pass reconstructs the ground truth without duplicates.
class OraclePredictor {
  public:
    OraclePredictor(const SyntheticScene& scene, const OracleNoise& noise);
    OraclePrediction predict(int view);

  private:
    const SyntheticScene& scene_;
    OracleNoise noise_;
    std::vector<char> claimed_;
    double trajectory_extent_;
};

// Max pairwise camera translation distance (>= 1e-9 guard, 1.0 fallback).
double trajectory_extent(const std::vector<RigidPose>& poses);

}  // namespace ssplat
