#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace breathwatch {

// Fixed set of workers executing indexed batches; used for per-frame work
// that is pure by index so results are position-addressed and order-free.
// Claims are handed out under the mutex so a worker can never carry a stale
// batch pointer across run_indexed calls; the work itself runs unlocked.
class ThreadPool {
public:
    explicit ThreadPool(int threads) {
        if (threads < 1) threads = 1;
        for (int i = 0; i < threads; ++i)
            workers_.emplace_back([this] { worker(); });
    }

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            quit_ = true;
        }
        cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    int size() const { return static_cast<int>(workers_.size()); }

    // Runs fn(i) for i in [0, n); returns when every call finished.
    void run_indexed(long n, const std::function<void(long)>& fn) {
        if (n <= 0) return;
        if (workers_.size() == 1) {
            for (long i = 0; i < n; ++i) fn(i);
            return;
        }
        std::exception_ptr err;
        {
            std::unique_lock<std::mutex> lk(mu_);
            fn_ = &fn;
            count_ = n;
            next_ = 0;
            done_ = 0;
            cv_.notify_all();
            done_cv_.wait(lk, [&] { return done_ == count_; });
            fn_ = nullptr;
            count_ = 0;
            err = error_;
            error_ = nullptr;
        }
        if (err) std::rethrow_exception(err);
    }

private:
    void worker() {
        std::unique_lock<std::mutex> lk(mu_);
        for (;;) {
            cv_.wait(lk, [&] { return quit_ || (fn_ != nullptr && next_ < count_); });
            if (quit_) return;
            while (fn_ != nullptr && next_ < count_) {
                const long i = next_++;
                const std::function<void(long)>* fn = fn_;
                lk.unlock();
                std::exception_ptr e;
                try {
                    (*fn)(i);
                } catch (...) {
                    e = std::current_exception();
                }
                lk.lock();
                if (e && !error_) error_ = e;
                if (++done_ == count_) done_cv_.notify_one();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(long)>* fn_ = nullptr;
    std::exception_ptr error_;
    bool quit_ = false;
    long count_ = 0;
    long next_ = 0;
    long done_ = 0;
};

}  // namespace breathwatch
