#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mortar {

/// Time-sampled multi-channel real signal. Sample k of every channel is the
/// value at time k * dt. All channels share one length.
struct SignalTrace {
  double dt = 1.0;
  std::map<std::string, std::vector<double>> channels;

  std::size_t length() const {
    return channels.empty() ? 0 : channels.begin()->second.size();
  }

  void validate() const {
    if (!(dt > 0.0))
      throw std::invalid_argument("SignalTrace: dt must be positive");
    if (channels.empty())
      throw std::invalid_argument("SignalTrace: no channels");
    const std::size_t n = length();
    if (n == 0) throw std::invalid_argument("SignalTrace: channels are empty");
    for (const auto& [name, samples] : channels) {
      if (name.empty())
        throw std::invalid_argument("SignalTrace: empty channel name");
      if (samples.size() != n)
        throw std::invalid_argument("SignalTrace: length mismatch in channel " +
                                    name);
    }
  }
};

}  // namespace mortar
