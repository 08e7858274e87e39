#pragma once

#include "drddpc/model.hpp"

#include <string>

namespace drddpc {

// Offline data blocks. M stacks (Up, Yp, Uf) in that order.
struct HankelPartition {
    MatrixXd Up, Uf, Yp, Yf, M;
    int Tp = 0, Tf = 0, N = 0;
    int m = 0, p = 0;
    bool full_row_rank = true; // advisory; rank deficiency is not fatal
};

// Hankel matrix of depth L: column j stacks z over window [j, j+L-1].
MatrixXd hankel(const MatrixXd &z, int L);

HankelPartition partition(const Trajectory &traj, int Tp, int Tf);

// Open-loop run with i.i.d. Gaussian inputs of the given standard
// deviation; deterministic per seed.
Trajectory excite_and_collect(const StateSpaceModel &model,
                              const NoiseSpec &noise, int T, double input_std,
                              std::uint64_t seed);

void write_csv(const Trajectory &traj, const std::string &path);
Trajectory read_csv(const std::string &path);

} // namespace drddpc
