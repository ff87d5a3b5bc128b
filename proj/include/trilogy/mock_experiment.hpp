#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <string>
#include <vector>

#include "trilogy/resource_agent.hpp"

namespace trilogy::agentbus {

// Stand-in for experimental hardware: runs "experiments" that sleep, wait
// for a manual release, or fail on demand. Instrumented so tests can
// observe exact start order and peak concurrency.
class MockExperiment : public Resource {
public:
    struct Options {
        std::string resource_name = "mock-experiment";
        std::vector<std::string> topics;
        std::vector<std::string> keywords;
        int input_arity = 1;
        int max_instances = 1;
        std::chrono::milliseconds run_duration{0};
        bool hold = false;            // block each run until release()
        std::string fail_reason;      // non-empty: every run fails with this text
        std::string failure_class = kFailResourceCrash;
    };

    explicit MockExperiment(Options options);

    broker::BrokerDescriptor descriptor() const override;
    nlohmann::json invoke(const std::string& service, const std::vector<std::string>& inputs,
                          const std::string& user) override;

    // Lets n held runs proceed.
    void release(int n = 1);
    void release_all();

    // Instrumentation.
    int started() const;
    int completed() const;
    int current_running() const;
    int peak_running() const;
    std::vector<std::string> start_order() const;  // first input of each run, in start order
    bool wait_for_started(int n, std::chrono::milliseconds timeout) const;
    bool wait_for_completed(int n, std::chrono::milliseconds timeout) const;

private:
    Options options_;
    mutable std::mutex mutex_;
    mutable std::condition_variable cv_;
    int started_ = 0;
    int completed_ = 0;
    int current_ = 0;
    int peak_ = 0;
    int release_budget_ = 0;
    bool release_everything_ = false;
    std::vector<std::string> start_order_;
};

}  // namespace trilogy::agentbus
