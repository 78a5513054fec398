#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "momc/weights.hpp"

using namespace momc;

TEST_CASE("binomial coefficients")
{
    CHECK(binomial(0, 0) == 1);
    CHECK(binomial(5, 2) == 10);
    CHECK(binomial(23, 2) == 253);
    CHECK(binomial(16, 3) == 560);
    CHECK(binomial(20, 2) == 190);
    CHECK(binomial(12, 3) == 220);
    CHECK(binomial(11, 2) == 55);
    CHECK(binomial(4, 7) == 0);
}

TEST_CASE("weight vector invariants")
{
    const WeightVector w({3, 1, 0}, 4);
    CHECK(w.size() == 3);
    CHECK(w[0] == 0.75);
    CHECK(w[2] == 0.0);
    CHECK_FALSE(w.is_interior());
    CHECK(WeightVector({1, 1, 2}, 4).is_interior());

    CHECK_THROWS_AS(WeightVector({1, 1}, 3), std::invalid_argument);
    CHECK_THROWS_AS(WeightVector({-1, 4}, 3), std::invalid_argument);
    CHECK_THROWS_AS(WeightVector({1, 1}, 0), std::invalid_argument);
}

TEST_CASE("das_dennis k=2 h=2 enumerates the three lattice points in order")
{
    const auto lattice = das_dennis(2, 2);
    REQUIRE(lattice.size() == 3);
    CHECK(lattice[0] == WeightVector({2, 0}, 2));
    CHECK(lattice[1] == WeightVector({1, 1}, 2));
    CHECK(lattice[2] == WeightVector({0, 2}, 2));
}

TEST_CASE("das_dennis cardinality matches stars and bars")
{
    CHECK(das_dennis(3, 21).size() == 253);
    CHECK(das_dennis(4, 13).size() == 560);
    CHECK(das_dennis(2, 7).size() == 8);

    for (const auto& w : das_dennis(3, 5)) {
        double sum = 0;
        for (int k = 0; k < w.size(); ++k) {
            sum += w[k];
            // exact lattice multiples of 1/H
            CHECK(std::abs(w[k] * 5.0 - std::round(w[k] * 5.0)) < 1e-12);
        }
        CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
    }

    CHECK_THROWS_AS(das_dennis(1, 5), std::invalid_argument);
    CHECK_THROWS_AS(das_dennis(3, 0), std::invalid_argument);
}

TEST_CASE("lattice order is lexicographically descending")
{
    const auto lattice = das_dennis(3, 4);
    for (std::size_t i = 1; i < lattice.size(); ++i) {
        bool descending = false;
        for (int k = 0; k < 3; ++k) {
            if (lattice[i - 1].numerator(k) != lattice[i].numerator(k)) {
                descending = lattice[i - 1].numerator(k) > lattice[i].numerator(k);
                break;
            }
        }
        CHECK(descending);
    }
    CHECK(lattice.front() == WeightVector({4, 0, 0}, 4));
    CHECK(lattice.back() == WeightVector({0, 0, 4}, 4));
}

TEST_CASE("interior filter keeps strictly positive vectors")
{
    CHECK(interior_filter(das_dennis(3, 21)).size() == 190);
    CHECK(interior_filter(das_dennis(4, 13)).size() == 220);
    CHECK(interior_filter(das_dennis(3, 12)).size() == 55);

    for (const auto& w : interior_filter(das_dennis(3, 12))) {
        CHECK(w.is_interior());
    }
}

TEST_CASE("resolution selection inverts the interior count")
{
    CHECK(resolution_for_interior_count(3, 190) == 21);
    CHECK(resolution_for_interior_count(4, 220) == 13);
    CHECK(resolution_for_interior_count(3, 55) == 12);
    CHECK(resolution_for_interior_count(2, 5) == 6);
    CHECK(resolution_for_interior_count(3, 1) == 3);
    CHECK_THROWS_AS(resolution_for_interior_count(1, 10), std::invalid_argument);
}

TEST_CASE("weights csv export")
{
    const auto path = std::filesystem::temp_directory_path() / "momc_weights.csv";
    const auto lattice = interior_filter(das_dennis(3, 4));
    save_weights_csv(lattice, path);

    std::ifstream in(path);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string cell;
        double sum = 0;
        int cols = 0;
        while (std::getline(row, cell, ',')) {
            sum += std::stod(cell);
            ++cols;
        }
        CHECK(cols == 3);
        CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
        ++rows;
    }
    CHECK(rows == lattice.size());
}
