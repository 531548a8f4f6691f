// Copyright 2026-present the cog authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "cog/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "json.hpp"

namespace cog {

TrainingBatch TrainingBatch::build(const Corpus& corpus, std::vector<SegmentedDocument> documents,
                                   std::uint32_t max_len) {
  if (max_len < 1) throw UsageError("max phrase length must be >= 1");
  for (const auto& sd : documents) {
    const auto& target = corpus.doc(sd.doc_id).tokens;
    std::size_t cursor = 0;
    for (const auto& seg : sd.segments) {
      if (seg.is_phrase()) {
        if (seg.source_doc >= corpus.size()) {
          throw DataError("segment in document " + std::to_string(sd.doc_id) +
                          " refers to unknown source document " + std::to_string(seg.source_doc));
        }
        const auto& src = corpus.doc(seg.source_doc).tokens;
        if (seg.start > seg.end || seg.end >= src.size() || seg.length() > max_len) {
          throw DataError("segment in document " + std::to_string(sd.doc_id) +
                          " has an unresolvable source span");
        }
        if (cursor + seg.length() > target.size() ||
            !std::equal(src.begin() + seg.start, src.begin() + seg.end + 1,
                        target.begin() + static_cast<std::ptrdiff_t>(cursor))) {
          throw DataError("segment in document " + std::to_string(sd.doc_id) +
                          " does not match its source span");
        }
      } else if (cursor >= target.size() || target[cursor] != seg.token) {
        throw DataError("token segment in document " + std::to_string(sd.doc_id) +
                        " does not match the document");
      }
      cursor += seg.length();
    }
    if (cursor != target.size()) {
      throw DataError("segmentation of document " + std::to_string(sd.doc_id) +
                      " does not cover the document");
    }
  }
  TrainingBatch batch;
  batch.corpus_ = &corpus;
  batch.documents_ = std::move(documents);
  batch.max_len_ = max_len;
  return batch;
}

double info_nce_term(std::span<const double> scores, std::size_t positive) {
  if (positive >= scores.size()) throw DataError("positive index out of range");
  const double peak = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - peak);
  return peak + std::log(sum) - scores[positive];
}

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

struct DocState {
  bool active = false;
  ContextStates ctx;
  std::vector<double> start;  // m x h
  std::vector<double> end;    // m x h
  std::vector<double> d_ctx;
  std::vector<double> d_start;
  std::vector<double> d_end;
};

/// Forward and backward pass of both losses over one batch.
class LossEvaluator {
 public:
  LossEvaluator(const TrainingBatch& batch, const ToyParams& params, bool with_gradient)
      : batch_(batch),
        params_(params),
        with_gradient_(with_gradient),
        d_(params.dim()),
        h_(params.half_dim()),
        docs_(batch.corpus().size()) {
    if (params.vocab_size() != batch.corpus().vocabulary().size()) {
      throw DataError("parameter vocabulary (" + std::to_string(params.vocab_size()) +
                      ") does not match the corpus vocabulary (" +
                      std::to_string(batch.corpus().vocabulary().size()) + ")");
    }
    if (with_gradient_) gradient_.assign(params.size(), 0.0);
    for (const auto& sd : batch.documents()) {
      activate(sd.doc_id);
      for (const auto& seg : sd.segments) {
        if (seg.is_phrase()) activate(seg.source_doc);
      }
    }
  }

  void add_phrase_loss(const LossOptions& options, LossReport& report) {
    std::size_t n = 0;
    for (const auto& sd : batch_.documents()) {
      std::size_t cursor = 0;
      for (const auto& seg : sd.segments) {
        if (cursor > 0) ++n;
        cursor += seg.length();
      }
    }
    report.segments = n;
    report.phrase = 0.0;
    if (n == 0) return;
    const double scale = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (const auto& sd : batch_.documents()) {
      std::size_t cursor = 0;
      for (const auto& seg : sd.segments) {
        if (cursor > 0) {
          const double term = phrase_term(sd.doc_id, cursor - 1, seg, options, scale, report);
          report.segment_terms.push_back(term);
          total += term;
        }
        cursor += seg.length();
      }
    }
    report.phrase = total * scale;
  }

  void add_token_loss(LossReport& report) {
    std::size_t count = 0;
    for (const auto& sd : batch_.documents()) {
      const auto m = batch_.corpus().doc(sd.doc_id).tokens.size();
      if (m > 1) count += m - 1;
    }
    report.positions = count;
    report.token = 0.0;
    if (count == 0) return;
    const double scale = 1.0 / static_cast<double>(count);
    double total = 0.0;
    const std::size_t v = params_.vocab_size();
    std::vector<double> logits(v);
    for (const auto& sd : batch_.documents()) {
      const auto& tokens = batch_.corpus().doc(sd.doc_id).tokens;
      auto& ds = docs_[sd.doc_id];
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        const double* q = ds.ctx.states.data() + (i - 1) * d_;
        for (TokenId w = 0; w < v; ++w) logits[w] = dot(q, token_row(w), d_);
        const double lse = log_sum_exp(logits);
        total += lse - logits[tokens[i]];
        if (!with_gradient_) continue;
        double* dq = ds.d_ctx.data() + (i - 1) * d_;
        for (TokenId w = 0; w < v; ++w) {
          double coeff = std::exp(logits[w] - lse);
          if (w == tokens[i]) coeff -= 1.0;
          coeff *= scale;
          axpy(coeff, q, token_grad(w), d_);
          axpy(coeff, token_row(w), dq, d_);
        }
      }
    }
    report.token = total * scale;
  }

  std::vector<double> finish() {
    if (!with_gradient_) return {};
    const std::size_t dt = params_.token_dim();
    const auto ws = params_.start_weight();
    const auto we = params_.end_weight();
    double* g_ws = gradient_.data() + params_.start_weight_offset();
    double* g_bs = gradient_.data() + params_.start_bias_offset();
    double* g_we = gradient_.data() + params_.end_weight_offset();
    double* g_be = gradient_.data() + params_.end_bias_offset();
    const double alpha = params_.alpha();
    for (DocId id = 0; id < docs_.size(); ++id) {
      auto& ds = docs_[id];
      if (!ds.active) continue;
      const auto& tokens = batch_.corpus().doc(id).tokens;
      const std::size_t m = tokens.size();
      // MLP_start / MLP_end.
      for (std::size_t t = 0; t < m; ++t) {
        const double* c = ds.ctx.states.data() + t * dt;
        double* dc = ds.d_ctx.data() + t * dt;
        for (std::size_t r = 0; r < h_; ++r) {
          const double gs = ds.d_start[t * h_ + r];
          const double ge = ds.d_end[t * h_ + r];
          if (gs != 0.0) {
            axpy(gs, c, g_ws + r * dt, dt);
            g_bs[r] += gs;
            axpy(gs, ws.data() + r * dt, dc, dt);
          }
          if (ge != 0.0) {
            axpy(ge, c, g_we + r * dt, dt);
            g_be[r] += ge;
            axpy(ge, we.data() + r * dt, dc, dt);
          }
        }
      }
      // Recurrence, last position first.
      std::vector<double> gu(dt);
      for (std::size_t t = m; t-- > 0;) {
        const double* c = ds.ctx.states.data() + t * dt;
        const double* g = ds.d_ctx.data() + t * dt;
        const double norm = ds.ctx.norms[t];
        if (norm > 0.0) {
          const double proj = dot(c, g, dt);
          for (std::size_t i = 0; i < dt; ++i) gu[i] = (g[i] - c[i] * proj) / norm;
        } else {
          std::copy(g, g + dt, gu.begin());
        }
        axpy(alpha, gu.data(), gradient_.data() + params_.embeddings_offset() + tokens[t] * dt, dt);
        if (t > 0) axpy(1.0 - alpha, gu.data(), ds.d_ctx.data() + (t - 1) * dt, dt);
      }
    }
    return std::move(gradient_);
  }

 private:
  void activate(DocId id) {
    auto& ds = docs_[id];
    if (ds.active) return;
    ds.active = true;
    const auto& tokens = batch_.corpus().doc(id).tokens;
    ds.ctx = contextualize(params_, tokens);
    const std::size_t m = tokens.size();
    ds.start.assign(m * h_, 0.0);
    ds.end.assign(m * h_, 0.0);
    for (std::size_t t = 0; t < m; ++t) {
      apply_affine(params_.start_weight(), params_.start_bias(), ds.ctx.row(t),
                   {ds.start.data() + t * h_, h_});
      apply_affine(params_.end_weight(), params_.end_bias(), ds.ctx.row(t),
                   {ds.end.data() + t * h_, h_});
    }
    if (with_gradient_) {
      ds.d_ctx.assign(m * ds.ctx.cols, 0.0);
      ds.d_start.assign(m * h_, 0.0);
      ds.d_end.assign(m * h_, 0.0);
    }
  }

  const double* token_row(TokenId w) const {
    return params_.values().data() + params_.token_table_offset() + std::size_t{w} * d_;
  }
  double* token_grad(TokenId w) {
    return gradient_.data() + params_.token_table_offset() + std::size_t{w} * d_;
  }

  static double log_sum_exp(std::span<const double> xs) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double x : xs) peak = std::max(peak, x);
    if (!std::isfinite(peak)) return peak;
    double sum = 0.0;
    for (double x : xs) sum += std::exp(x - peak);
    return peak + std::log(sum);
  }

  // One InfoNCE term for the segment whose prefix ends at `prefix_pos` of
  // document `doc`. Gradients are accumulated with weight `scale`.
  double phrase_term(DocId doc, std::size_t prefix_pos, const Segment& seg,
                     const LossOptions& options, double scale, LossReport& report) {
    auto& self = docs_[doc];
    const double* q = self.ctx.states.data() + prefix_pos * d_;
    const double* q_start = q;
    const double* q_end = q + h_;
    const std::size_t v = params_.vocab_size();
    const bool use_tokens = options.token_negatives || !seg.is_phrase();

    // Scores are laid out as [tokens..., spans...]; a masked token set keeps
    // only the positive when the segment is a token.
    std::vector<double> scores;
    std::vector<TokenId> token_ids;
    std::size_t positive = 0;
    if (use_tokens) {
      if (options.token_negatives) {
        for (TokenId w = 0; w < v; ++w) token_ids.push_back(w);
      } else {
        token_ids.push_back(seg.token);
      }
      for (TokenId w : token_ids) scores.push_back(dot(q, token_row(w), d_));
      if (!seg.is_phrase()) {
        positive = static_cast<std::size_t>(
            std::find(token_ids.begin(), token_ids.end(), seg.token) - token_ids.begin());
      }
    }
    const std::size_t token_count = scores.size();

    DocState* src = nullptr;
    std::size_t m = 0;
    std::vector<double> a, b;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> spans;
    if (seg.is_phrase()) {
      src = &docs_[seg.source_doc];
      m = src->ctx.rows;
      a.resize(m);
      b.resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        a[j] = dot(q_start, src->start.data() + j * h_, h_);
        b[j] = dot(q_end, src->end.data() + j * h_, h_);
      }
      const std::size_t max_len = batch_.max_len();
      for (std::size_t s = 0; s < m; ++s) {
        for (std::size_t e = s; e < std::min(m, s + max_len); ++e) {
          if (s == seg.start && e == seg.end) positive = scores.size();
          spans.emplace_back(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(e));
          scores.push_back(a[s] + b[e]);
        }
      }
    }

    const double lse = log_sum_exp(scores);
    const double term = lse - scores[positive];
    bool correct = true;
    for (std::size_t i = 0; i < scores.size() && correct; ++i) {
      if (i != positive && scores[i] >= scores[positive]) correct = false;
    }
    if (correct) ++report.correct;
    if (!with_gradient_) return term;

    double* dq = self.d_ctx.data() + prefix_pos * d_;
    for (std::size_t i = 0; i < token_count; ++i) {
      double coeff = std::exp(scores[i] - lse);
      if (i == positive) coeff -= 1.0;
      coeff *= scale;
      const TokenId w = token_ids[i];
      axpy(coeff, q, token_grad(w), d_);
      axpy(coeff, token_row(w), dq, d_);
    }
    if (src != nullptr) {
      std::vector<double> start_weight(m, 0.0), end_weight(m, 0.0);
      for (std::size_t k = 0; k < spans.size(); ++k) {
        const std::size_t i = token_count + k;
        double coeff = std::exp(scores[i] - lse);
        if (i == positive) coeff -= 1.0;
        start_weight[spans[k].first] += coeff;
        end_weight[spans[k].second] += coeff;
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (start_weight[j] != 0.0) {
          const double c = scale * start_weight[j];
          axpy(c, q_start, src->d_start.data() + j * h_, h_);
          axpy(c, src->start.data() + j * h_, dq, h_);
        }
        if (end_weight[j] != 0.0) {
          const double c = scale * end_weight[j];
          axpy(c, q_end, src->d_end.data() + j * h_, h_);
          axpy(c, src->end.data() + j * h_, dq + h_, h_);
        }
      }
    }
    return term;
  }

  const TrainingBatch& batch_;
  const ToyParams& params_;
  bool with_gradient_;
  std::size_t d_;
  std::size_t h_;
  std::vector<DocState> docs_;
  std::vector<double> gradient_;
};

LossAndGradient evaluate(const TrainingBatch& batch, const ToyParams& params, bool phrase,
                         bool token, const LossOptions& options, bool with_gradient) {
  LossEvaluator ev(batch, params, with_gradient);
  LossAndGradient out;
  if (phrase) ev.add_phrase_loss(options, out.report);
  if (token) ev.add_token_loss(out.report);
  out.report.total = out.report.phrase + out.report.token;
  out.gradient = ev.finish();
  return out;
}

}  // namespace

LossAndGradient phrase_loss(const TrainingBatch& batch, const ToyParams& params,
                            const LossOptions& options) {
  return evaluate(batch, params, true, false, options, true);
}

LossAndGradient token_loss(const TrainingBatch& batch, const ToyParams& params) {
  return evaluate(batch, params, false, true, {}, true);
}

LossAndGradient total_loss(const TrainingBatch& batch, const ToyParams& params,
                           const LossOptions& options) {
  return evaluate(batch, params, true, true, options, true);
}

double finite_diff_check(const Objective& objective, std::span<const double> theta,
                         double epsilon) {
  std::vector<double> point(theta.begin(), theta.end());
  std::vector<double> analytic;
  objective(point, &analytic);
  if (analytic.size() != point.size()) throw DataError("objective returned a mis-sized gradient");
  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + epsilon;
    const double up = objective(point, nullptr);
    point[i] = saved - epsilon;
    const double down = objective(point, nullptr);
    point[i] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

double finite_diff_check(const TrainingBatch& batch, const ToyParams& params, double epsilon) {
  ToyParams probe = params;
  Objective f = [&](std::span<const double> theta, std::vector<double>* grad) {
    std::copy(theta.begin(), theta.end(), probe.values().begin());
    auto r = evaluate(batch, probe, true, true, {}, grad != nullptr);
    if (grad != nullptr) *grad = std::move(r.gradient);
    return r.report.total;
  };
  return finite_diff_check(f, params.values(), epsilon);
}

TrainResult train_toy(const Corpus& corpus, const std::vector<SegmentedDocument>& segmentation,
                      const TrainHyperparams& hyper, std::optional<ToyParams> initial) {
  if (hyper.learning_rate <= 0.0 || !std::isfinite(hyper.learning_rate)) {
    throw UsageError("learning rate must be positive");
  }
  const auto batch = TrainingBatch::build(corpus, segmentation, hyper.max_len);
  TrainResult result;
  result.params = initial ? std::move(*initial)
                          : ToyParams::seeded(static_cast<std::uint32_t>(
                                                  corpus.vocabulary().size()),
                                              hyper.dim, hyper.seed);
  const std::size_t log_every = std::max<std::size_t>(1, hyper.log_every);
  auto record = [&](std::size_t step, const LossReport& r) {
    result.log.push_back({step, r.total, r.phrase, r.token, r.accuracy()});
  };

  for (std::size_t step = 0; step <= hyper.steps; ++step) {
    const bool last = step == hyper.steps;
    auto eval = evaluate(batch, result.params, true, true, {}, !last);
    const auto& r = eval.report;
    if (!std::isfinite(r.total)) {
      result.diverged = true;
      record(step, r);
      return result;  // params still hold the last finite-loss point
    }
    const bool reached = hyper.target_accuracy && r.accuracy() >= *hyper.target_accuracy;
    if (last || reached || step % log_every == 0) record(step, r);
    if (last || reached) break;

    double sq = 0.0;
    for (double g : eval.gradient) sq += g * g;
    const double norm = std::sqrt(sq);
    double factor = hyper.learning_rate;
    if (hyper.clip_norm > 0.0 && norm > hyper.clip_norm) factor *= hyper.clip_norm / norm;
    auto& values = result.params.values();
    std::vector<double> next(values);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] -= factor * eval.gradient[i];
    bool finite = true;
    for (double x : next) finite = finite && std::isfinite(x);
    if (!finite) {
      result.diverged = true;
      return result;
    }
    values = std::move(next);
  }
  return result;
}

void write_metrics_jsonl(std::ostream& out, std::span<const TrainMetrics> log) {
  for (const auto& m : log) {
    out << nlohmann::json{{"step", m.step}, {"L", m.total}, {"L_p", m.phrase},
                          {"L_t", m.token},  {"acc", m.accuracy}}
               .dump()
        << '\n';
  }
}

}  // namespace cog
