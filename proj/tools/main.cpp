/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return diffuse::cli::run_cli(argc, argv, std::cout, std::cerr); }
