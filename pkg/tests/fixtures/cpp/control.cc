// Control-flow declarations: loop indices, condition bindings, catch params.
#include <map>
#include <stdexcept>
#include <string>

int sum_upto(int limit) {
    int sum = 0;
    for (int i = 0; i < limit; ++i) {
        sum += i;
    }
    return sum;
}

int count_matches(const std::map<std::string, int>& index, const std::string& key) {
    int hits = 0;
    for (const auto& entry : index) {
        if (entry.first == key) ++hits;
    }
    return hits;
}

int guarded_lookup(const std::map<std::string, int>& table, const std::string& key) {
    if (auto found = table.find(key); found != table.end()) {
        return found->second;
    }
    return -1;
}

int drain(int budget) {
    while (int step = budget > 10 ? 10 : budget) {
        budget -= step;
        if (budget <= 0) break;
    }
    return budget;
}

int safe_parse(const std::string& text) {
    try {
        return std::stoi(text);
    } catch (const std::invalid_argument& bad) {
        (void)bad;
        return 0;
    } catch (const std::out_of_range& overflow) {
        (void)overflow;
        return -1;
    }
}

int state_machine(int signal) {
    switch (signal) {
        case 0:
            return 10;
        case 1: {
            int boosted = signal * 2;
            return boosted;
        }
        default:
            return -signal;
    }
}
