// Copyright 2026 the adcp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

#include "adcp/common.hpp"

namespace adcp {

template <typename S>
class Tape;

namespace detail {

template <typename S>
struct Node {
    Shape shape;
    std::vector<S> value;
    std::vector<S> grad;  // allocated iff requires_grad
    bool requires_grad = false;
    const Tape<S>* tape = nullptr;  // tape that recorded the producing op; null for leaves
};

template <typename S>
Tape<S>*& active_tape_slot() {
    thread_local Tape<S>* t = nullptr;
    return t;
}

} // namespace detail

/// Dense N-dimensional array of scalars, row-major with the last axis fastest.
/// Copies are shallow handles to the same storage; values are treated as
/// immutable once an op has produced them, only grad buffers mutate.
template <typename S>
class Tensor {
public:
    using Scalar = S;

    Tensor() = default;

    static Tensor zeros(Shape shape) {
        Tensor t;
        t.n_ = std::make_shared<detail::Node<S>>();
        const int64_t n = adcp::numel(shape);
        check(n >= 0, "tensor shape ", to_string(shape), " has negative extent");
        t.n_->shape = std::move(shape);
        t.n_->value.assign(static_cast<size_t>(n), S(0));
        return t;
    }

    static Tensor full(Shape shape, S v) {
        Tensor t = zeros(std::move(shape));
        for (S& x : t.n_->value) x = v;
        return t;
    }

    static Tensor from(Shape shape, std::vector<S> data) {
        Tensor t;
        t.n_ = std::make_shared<detail::Node<S>>();
        check(adcp::numel(shape) == static_cast<int64_t>(data.size()),
              "data length ", data.size(), " does not match shape ", to_string(shape));
        t.n_->shape = std::move(shape);
        t.n_->value = std::move(data);
        return t;
    }

    static Tensor scalar(S v) { return full({1}, v); }

    bool defined() const { return n_ != nullptr; }
    const Shape& shape() const { return n_->shape; }
    int ndim() const { return static_cast<int>(n_->shape.size()); }
    int dim(int i) const { return n_->shape[static_cast<size_t>(i)]; }
    int64_t numel() const { return static_cast<int64_t>(n_->value.size()); }

    std::span<S> data() { return {n_->value.data(), n_->value.size()}; }
    std::span<const S> data() const { return {n_->value.data(), n_->value.size()}; }

    bool requires_grad() const { return n_->requires_grad; }

    Tensor& set_requires_grad(bool rg) {
        n_->requires_grad = rg;
        if (rg)
            n_->grad.assign(n_->value.size(), S(0));
        else
            n_->grad.clear();
        return *this;
    }

    std::span<S> grad() {
        check(n_->requires_grad, "tensor does not track gradients");
        return {n_->grad.data(), n_->grad.size()};
    }
    std::span<const S> grad() const {
        check(n_->requires_grad, "tensor does not track gradients");
        return {n_->grad.data(), n_->grad.size()};
    }

    void zero_grad() {
        for (S& g : n_->grad) g = S(0);
    }

    S item() const {
        check(numel() == 1, "item() on tensor of shape ", to_string(shape()));
        return n_->value[0];
    }

    /// Row-major flat index of a multi-index.
    int64_t index(std::initializer_list<int> idx) const {
        int64_t flat = 0;
        size_t d = 0;
        for (int i : idx) {
            flat = flat * n_->shape[d] + i;
            ++d;
        }
        return flat;
    }

    S at(std::initializer_list<int> idx) const { return n_->value[static_cast<size_t>(index(idx))]; }

    std::shared_ptr<detail::Node<S>> node() const { return n_; }

private:
    std::shared_ptr<detail::Node<S>> n_;
};

/// Ordered record of executed differentiable ops. Constructing a Tape makes it
/// the active recording target for the current thread; destruction restores
/// the previous one. One backward() traversal per recording; reset() rearms.
template <typename S>
class Tape {
public:
    Tape() : outer_(detail::active_tape_slot<S>()) { detail::active_tape_slot<S>() = this; }
    ~Tape() { detail::active_tape_slot<S>() = outer_; }
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active() { return detail::active_tape_slot<S>(); }

    void record(std::function<void()> backward_rule) {
        records_.push_back(std::move(backward_rule));
    }

    size_t size() const { return records_.size(); }

    /// Populates dLoss/dleaf for every requires_grad tensor reachable from the
    /// loss. The loss must be a scalar produced while this tape was recording.
    void backward(const Tensor<S>& loss) {
        check(loss.numel() == 1, "backward() needs a scalar loss, got shape ",
              to_string(loss.shape()));
        check(loss.node()->tape == this && loss.requires_grad(),
              "loss is detached from this tape");
        check(!consumed_, "backward() already ran on this tape; reset() first");
        consumed_ = true;
        loss.node()->grad[0] = S(1);
        for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
    }

    void reset() {
        records_.clear();
        consumed_ = false;
    }

private:
    std::vector<std::function<void()>> records_;
    Tape* outer_ = nullptr;
    bool consumed_ = false;
};

/// Suspends recording for its scope (forward-only evaluation under an open tape).
template <typename S>
class NoGradScope {
public:
    NoGradScope() : saved_(detail::active_tape_slot<S>()) { detail::active_tape_slot<S>() = nullptr; }
    ~NoGradScope() { detail::active_tape_slot<S>() = saved_; }
    NoGradScope(const NoGradScope&) = delete;
    NoGradScope& operator=(const NoGradScope&) = delete;

private:
    Tape<S>* saved_;
};

namespace detail {

/// Shared plumbing for op implementations: makes the output node, decides
/// whether to record, and wires the grad buffers.
template <typename S>
struct OpResult {
    Tensor<S> out;
    bool recording = false;
};

template <typename S>
OpResult<S> make_op_output(Shape shape, bool any_input_requires_grad) {
    OpResult<S> r;
    r.out = Tensor<S>::zeros(std::move(shape));
    Tape<S>* tape = Tape<S>::active();
    r.recording = tape != nullptr && any_input_requires_grad;
    if (r.recording) {
        r.out.set_requires_grad(true);
        r.out.node()->tape = tape;
    }
    return r;
}

} // namespace detail

} // namespace adcp
