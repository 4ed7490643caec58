#pragma once

#include <memory>
#include <string>

#include "qlearn/envs/catch.hpp"
#include "qlearn/envs/gridworld.hpp"
#include "qlearn/envs/tabular.hpp"

namespace qlearn::envs {

/// Constructs a built-in environment: "catch", "gridworld" or "tabular".
/// `size` overrides the board size of catch and gridworld when non-zero.
inline std::unique_ptr<Environment> make_env(const std::string& name, std::size_t size = 0) {
    if (name == "catch") return std::make_unique<Catch>(size ? size : 24);
    if (name == "gridworld") return std::make_unique<GridWorld>(size ? size : 8);
    if (name == "tabular") return std::make_unique<Tabular>();
    throw std::invalid_argument("unknown environment '" + name + "' (catch|gridworld|tabular)");
}

}  // namespace qlearn::envs
