#pragma once

#include <array>
#include <vector>

namespace newsbench {

std::array<double, 2> softmax2(const std::array<double, 2>& logits, double temperature = 1.0);

// Cross-entropy of a 2-way softmax; optionally writes dloss/dlogits.
double softmax_ce(const std::array<double, 2>& logits, int label, std::array<double, 2>* dlogits);

// alpha*CE(student, label) + (1-alpha)*T^2*KL(teacher_T || student_T).
// With alpha = 1 this is exactly plain cross-entropy.
double distill_loss(const std::array<double, 2>& student_logits,
                    const std::array<double, 2>& teacher_logits, int label, double alpha,
                    double temperature, std::array<double, 2>* dlogits);

// Cross-entropy over a logit vector (MLM output rows).
double softmax_ce_vec(const double* logits, std::size_t n, std::size_t target,
                      std::vector<double>* dlogits);

}  // namespace newsbench
