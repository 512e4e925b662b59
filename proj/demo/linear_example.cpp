// Filters one outlier with a plain Gaussian filter and with the robust filter.
#include "rgf/rgf.hpp"

#include <cstdio>

int main() {
    using namespace rgf;
    const GaussianBelief predicted(Vector::Zero(1), Matrix::Constant(1, 1, 2.0));
    const TailedSensorModel sensor = linear_example::sensor();

    std::printf("%8s %12s %12s %12s\n", "y", "gf-thin", "rgf", "rgf sd");
    for (const double y : {0.0, 1.0, 3.0, 6.0, 10.0, 30.0}) {
        IntegrationBackend gf_backend = IntegrationBackend::unscented();
        IntegrationBackend rgf_backend = IntegrationBackend::monte_carlo(1000, 7);
        const Vector obs = linear_example::scalar(y);
        const GaussianBelief thin = update(predicted, sensor.body_fn(), sensor.body_noise(), obs, gf_backend);
        const GaussianBelief robust = rgf_update(predicted, sensor, obs, rgf_backend);
        std::printf("%8.1f %12.4f %12.4f %12.4f\n", y, thin.mean()[0], robust.mean()[0],
                    std::sqrt(robust.covariance()(0, 0)));
    }
}
