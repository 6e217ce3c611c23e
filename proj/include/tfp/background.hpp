#pragma once

#include <atomic>
#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

namespace tfp {

/// Owns threads started for work that may outlive the request that began it.
/// Finished threads are reaped on the next spawn; the destructor joins the
/// rest, so nothing escapes the owner's lifetime.
class Background {
 public:
  Background() = default;
  Background(const Background&) = delete;
  Background& operator=(const Background&) = delete;
  ~Background() { join_all(); }

  template <typename F>
  auto spawn(F&& fn) -> std::future<std::invoke_result_t<F>> {
    using R = std::invoke_result_t<F>;
    auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
    auto result = task->get_future();
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::lock_guard lock(mu_);
    reap_locked();
    workers_.push_back({std::thread([task, done] {
                          (*task)();
                          done->store(true);
                        }),
                        done});
    return result;
  }

  void join_all() {
    std::vector<Worker> all;
    {
      std::lock_guard lock(mu_);
      all.swap(workers_);
    }
    for (auto& w : all) {
      if (w.thread.joinable()) w.thread.join();
    }
  }

 private:
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void reap_locked() {
    for (auto it = workers_.begin(); it != workers_.end();) {
      if (it->done->load()) {
        it->thread.join();
        it = workers_.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::mutex mu_;
  std::vector<Worker> workers_;
};

}  // namespace tfp
