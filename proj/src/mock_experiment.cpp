#include "trilogy/mock_experiment.hpp"

#include <algorithm>
#include <thread>

namespace trilogy::agentbus {

MockExperiment::MockExperiment(Options options) : options_(std::move(options)) {}

broker::BrokerDescriptor MockExperiment::descriptor() const {
    broker::BrokerDescriptor d;
    d.resource_name = options_.resource_name;
    d.topics = options_.topics;
    d.keywords = options_.keywords;
    d.services = {broker::ServiceSpec{kServiceRunExperiment, options_.input_arity,
                                      options_.max_instances}};
    return d;
}

nlohmann::json MockExperiment::invoke(const std::string& service,
                                      const std::vector<std::string>& inputs,
                                      const std::string& user) {
    (void)user;
    std::string label = inputs.empty() ? std::string("(none)") : inputs.front();
    {
        std::lock_guard lock(mutex_);
        ++started_;
        ++current_;
        peak_ = std::max(peak_, current_);
        start_order_.push_back(label);
    }
    cv_.notify_all();

    if (options_.hold) {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return release_everything_ || release_budget_ > 0; });
        if (!release_everything_) --release_budget_;
    } else if (options_.run_duration.count() > 0) {
        std::this_thread::sleep_for(options_.run_duration);
    }

    {
        std::lock_guard lock(mutex_);
        --current_;
        ++completed_;
    }
    cv_.notify_all();

    if (!options_.fail_reason.empty())
        throw ResourceFailure(options_.failure_class, options_.fail_reason);
    return {{"experiment", label}, {"status", "completed"}, {"service", service}};
}

void MockExperiment::release(int n) {
    {
        std::lock_guard lock(mutex_);
        release_budget_ += n;
    }
    cv_.notify_all();
}

void MockExperiment::release_all() {
    {
        std::lock_guard lock(mutex_);
        release_everything_ = true;
    }
    cv_.notify_all();
}

int MockExperiment::started() const {
    std::lock_guard lock(mutex_);
    return started_;
}

int MockExperiment::completed() const {
    std::lock_guard lock(mutex_);
    return completed_;
}

int MockExperiment::current_running() const {
    std::lock_guard lock(mutex_);
    return current_;
}

int MockExperiment::peak_running() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

std::vector<std::string> MockExperiment::start_order() const {
    std::lock_guard lock(mutex_);
    return start_order_;
}

bool MockExperiment::wait_for_started(int n, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, timeout, [&] { return started_ >= n; });
}

bool MockExperiment::wait_for_completed(int n, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, timeout, [&] { return completed_ >= n; });
}

}  // namespace trilogy::agentbus
