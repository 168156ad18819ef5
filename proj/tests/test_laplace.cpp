#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tdal/grad_check.hpp"
#include "tdal/head.hpp"
#include "tdal/info_scores.hpp"
#include "tdal/laplace_head.hpp"
#include "tdal/rng.hpp"

using namespace tdal;

TEST_CASE("laplace MAP loss gradients pass finite differences") {
  Rng r(2);
  Mlp net = Mlp::init({3, 4, 2}, Mlp::Hidden::tanh, Mlp::Output::softmax, r.stream("init"));
  Matrix z(6, 3);
  for (std::size_t k = 0; k < z.size(); ++k) z.data()[k] = r.normal();
  std::vector<int> y{0, 1, 0, 1, 1, 0};
  const double tempering = static_cast<double>(net.param_count());

  auto fn = [&]() {
    Mlp::Grads g;
    const double loss = laplace_map_loss(net, z, y, tempering, &g);
    std::vector<Matrix> grads;
    for (Matrix* p : g.params()) grads.push_back(*p);
    return std::make_pair(loss, grads);
  };
  CHECK(grad_check(fn, net.params()) <= 1e-4);
}

TEST_CASE("fit_laplace") {
  SECTION("prior-only fit sits at the prior mode with near-uniform predictions") {
    LaplaceConfig cfg;
    cfg.hidden = 4;
    cfg.posterior_samples = 60;
    cfg.map_steps = 800;
    cfg.map_learning_rate = 0.05;
    cfg.seed = 5;
    LaplaceMlpHead head = fit_laplace(Matrix(0, 2), {}, 3, cfg);

    double norm = 0.0;
    for (const auto& w : head.map_net.weights)
      for (std::size_t k = 0; k < w.size(); ++k) norm += w.data()[k] * w.data()[k];
    CHECK(norm < 1e-4);

    for (double h : head.hessian_diag) CHECK_THAT(h, Catch::Matchers::WithinAbs(1.0, 1e-12));

    HeadPosterior post(std::move(head));
    Matrix marginal = post.predict_marginal(Matrix::of({{0.4, -1.0}}));
    for (std::size_t c = 0; c < 3; ++c)
      CHECK_THAT(marginal(0, c), Catch::Matchers::WithinAbs(1.0 / 3.0, 0.15));
  }

  SECTION("members concentrate on separable data: BALD on training points is tiny") {
    Rng r(7);
    const std::size_t n = 60;
    Matrix z(n, 2);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int label = static_cast<int>(i % 2);
      z(i, 0) = (label == 0 ? -3.0 : 3.0) + 0.3 * r.normal();
      z(i, 1) = r.normal();
      y[i] = label;
    }
    LaplaceConfig cfg;
    cfg.hidden = 8;
    cfg.posterior_samples = 50;
    cfg.map_steps = 600;
    cfg.seed = 9;
    HeadPosterior head(fit_laplace(z, y, 2, cfg));
    MemberProbs mp = head.predict_members(z);
    double max_bald = 0.0;
    for (std::size_t b = 0; b < n; ++b) max_bald = std::max(max_bald, bald(mp.member_matrix(b)));
    CHECK(max_bald <= 0.05);
  }

  SECTION("MAP optimization does not increase the loss") {
    Rng r(11);
    Matrix z(20, 2);
    std::vector<int> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
      z(i, 0) = r.normal();
      z(i, 1) = r.normal();
      y[i] = z(i, 0) > 0 ? 1 : 0;
    }
    LaplaceConfig cfg;
    cfg.hidden = 6;
    cfg.map_steps = 300;
    cfg.posterior_samples = 10;
    cfg.seed = 13;

    // loss at the same Glorot init the fit uses
    Mlp init_net = Mlp::init({2, 6, 2}, Mlp::Hidden::tanh, Mlp::Output::softmax,
                             Rng(13).stream("map-init"));
    const double tempering = static_cast<double>(init_net.param_count());
    const double loss_at_init = laplace_map_loss(init_net, z, y, tempering, nullptr);

    LaplaceMlpHead head = fit_laplace(z, y, 2, cfg);
    const double loss_at_map = laplace_map_loss(head.map_net, z, y, head.tempering, nullptr);
    CHECK(loss_at_map <= loss_at_init);
  }

  SECTION("members are cached and deterministic") {
    Rng r(15);
    Matrix z(10, 2);
    std::vector<int> y(10);
    for (std::size_t i = 0; i < 10; ++i) {
      z(i, 0) = r.normal();
      z(i, 1) = r.normal();
      y[i] = static_cast<int>(i % 2);
    }
    LaplaceConfig cfg;
    cfg.hidden = 4;
    cfg.posterior_samples = 8;
    cfg.map_steps = 50;
    cfg.seed = 17;
    HeadPosterior a(fit_laplace(z, y, 2, cfg));
    HeadPosterior b(fit_laplace(z, y, 2, cfg));
    CHECK(a.predict_members(z).data == b.predict_members(z).data);
    CHECK(a.member_count() == 8);

    // rows are distributions
    MemberProbs mp = a.predict_members(z);
    for (std::size_t i = 0; i < mp.batch; ++i)
      for (std::size_t k = 0; k < mp.members; ++k) {
        double sum = 0.0;
        for (double v : mp.member_row(i, k)) sum += v;
        REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));
      }
  }
}
