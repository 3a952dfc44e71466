#pragma once

#include "dsr/parallel.hpp"
#include "dsr/train/bptt.hpp"

namespace dsr {

// Deterministic loss over a fixed set of teacher-forced windows. The window
// set is pinned (non-overlapping, in trajectory order), so Hessians, radius
// probes, and matched-loss comparisons all see the same function.
class WindowLoss {
  public:
    WindowLoss() = default;
    WindowLoss(std::vector<Mat> windows, int tau) : windows_(std::move(windows)), tau_(tau) {
        require(!windows_.empty(), "window loss: no windows");
    }

    static WindowLoss from_trajectories(const std::vector<Mat>& trajectories, int seq_len, int tau) {
        std::vector<Mat> windows;
        for (const Mat& traj : trajectories) {
            const int count = static_cast<int>(traj.rows()) / seq_len;
            for (int w = 0; w < count; ++w) windows.push_back(traj.middleRows(w * seq_len, seq_len));
        }
        return WindowLoss(std::move(windows), tau);
    }

    int window_count() const { return static_cast<int>(windows_.size()); }
    int tau() const { return tau_; }
    const std::vector<Mat>& windows() const { return windows_; }

    double eval(const ShPLRNN& model, int jobs = 1) const {
        std::vector<double> per(windows_.size());
        parallel_for(window_count(), jobs, [&](int i) {
            const Mat pred = stf_forward(model, windows_[i], tau_);
            per[i] = (pred - windows_[i]).squaredNorm() / windows_[i].size();
        });
        double total = 0.0;
        for (double v : per) total += v;
        return total / window_count();
    }

    Vec gradient(const ShPLRNN& model, int jobs = 1) const {
        ShplrnnGrads grads;
        bptt_gradient(model, windows_, tau_, grads, jobs);
        return grads.flatten(model);
    }

  private:
    std::vector<Mat> windows_;
    int tau_ = 1;
};

}  // namespace dsr
