#include "medial/predicates.hpp"

#include <gmpxx.h>

#include <cmath>

namespace medial::predicates {

namespace {

constexpr double kEps = 0x1p-53;
// Static filter constants, doubled for headroom.
constexpr double kCcwBound = 2.0 * (3.0 + 16.0 * kEps) * kEps;
constexpr double kO3dBound = 2.0 * (7.0 + 56.0 * kEps) * kEps;
constexpr double kIccBound = 2.0 * (10.0 + 96.0 * kEps) * kEps;
constexpr double kIspBound = 2.0 * (16.0 + 224.0 * kEps) * kEps;

int sign_of(const mpq_class& q)
{
    return sgn(q);
}

int sign_of(double d)
{
    return (d > 0) - (d < 0);
}

mpq_class q(double d)
{
    return mpq_class(d);
}

} // namespace

int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    const double left = (a.x() - c.x()) * (b.y() - c.y());
    const double right = (a.y() - c.y()) * (b.x() - c.x());
    const double det = left - right;
    const double bound = kCcwBound * (std::abs(left) + std::abs(right));
    if (std::abs(det) > bound)
        return sign_of(det);
    const mpq_class acx = q(a.x()) - q(c.x()), acy = q(a.y()) - q(c.y());
    const mpq_class bcx = q(b.x()) - q(c.x()), bcy = q(b.y()) - q(c.y());
    return sign_of(mpq_class(acx * bcy - acy * bcx));
}

int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
    // det(b-a, c-a, d-a), written relative to a.
    const double bx = b.x() - a.x(), by = b.y() - a.y(), bz = b.z() - a.z();
    const double cx = c.x() - a.x(), cy = c.y() - a.y(), cz = c.z() - a.z();
    const double dx = d.x() - a.x(), dy = d.y() - a.y(), dz = d.z() - a.z();
    const double cydz = cy * dz, czdy = cz * dy;
    const double czdx = cz * dx, cxdz = cx * dz;
    const double cxdy = cx * dy, cydx = cy * dx;
    const double det = bx * (cydz - czdy) + by * (czdx - cxdz) + bz * (cxdy - cydx);
    const double perm = std::abs(bx) * (std::abs(cydz) + std::abs(czdy)) +
                        std::abs(by) * (std::abs(czdx) + std::abs(cxdz)) +
                        std::abs(bz) * (std::abs(cxdy) + std::abs(cydx));
    if (std::abs(det) > kO3dBound * perm)
        return sign_of(det);

    const mpq_class ax = q(a.x()), ay = q(a.y()), az = q(a.z());
    const mpq_class Bx = q(b.x()) - ax, By = q(b.y()) - ay, Bz = q(b.z()) - az;
    const mpq_class Cx = q(c.x()) - ax, Cy = q(c.y()) - ay, Cz = q(c.z()) - az;
    const mpq_class Dx = q(d.x()) - ax, Dy = q(d.y()) - ay, Dz = q(d.z()) - az;
    const mpq_class e = Bx * (Cy * Dz - Cz * Dy) + By * (Cz * Dx - Cx * Dz) + Bz * (Cx * Dy - Cy * Dx);
    return sign_of(e);
}

int incircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
             const Eigen::Vector2d& d)
{
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double perm = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                        (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                        (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    if (std::abs(det) > kIccBound * perm)
        return sign_of(det);

    const mpq_class dx = q(d.x()), dy = q(d.y());
    const mpq_class Ax = q(a.x()) - dx, Ay = q(a.y()) - dy;
    const mpq_class Bx = q(b.x()) - dx, By = q(b.y()) - dy;
    const mpq_class Cx = q(c.x()) - dx, Cy = q(c.y()) - dy;
    const mpq_class Al = Ax * Ax + Ay * Ay, Bl = Bx * Bx + By * By, Cl = Cx * Cx + Cy * Cy;
    const mpq_class e = Al * (Bx * Cy - Cx * By) + Bl * (Cx * Ay - Ax * Cy) + Cl * (Ax * By - Bx * Ay);
    return sign_of(e);
}

int insphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e)
{
    const double aex = a.x() - e.x(), aey = a.y() - e.y(), aez = a.z() - e.z();
    const double bex = b.x() - e.x(), bey = b.y() - e.y(), bez = b.z() - e.z();
    const double cex = c.x() - e.x(), cey = c.y() - e.y(), cez = c.z() - e.z();
    const double dex = d.x() - e.x(), dey = d.y() - e.y(), dez = d.z() - e.z();

    const double aexbey = aex * bey, bexaey = bex * aey;
    const double bexcey = bex * cey, cexbey = cex * bey;
    const double cexdey = cex * dey, dexcey = dex * cey;
    const double dexaey = dex * aey, aexdey = aex * dey;
    const double aexcey = aex * cey, cexaey = cex * aey;
    const double bexdey = bex * dey, dexbey = dex * bey;
    const double ab = aexbey - bexaey, bc = bexcey - cexbey, cd = cexdey - dexcey;
    const double da = dexaey - aexdey, ac = aexcey - cexaey, bd = bexdey - dexbey;

    const double abc = aez * bc - bez * ac + cez * ab;
    const double bcd = bez * cd - cez * bd + dez * bc;
    const double cda = cez * da + dez * ac + aez * cd;
    const double dab = dez * ab + aez * bd + bez * da;

    const double alift = aex * aex + aey * aey + aez * aez;
    const double blift = bex * bex + bey * bey + bez * bez;
    const double clift = cex * cex + cey * cey + cez * cez;
    const double dlift = dex * dex + dey * dey + dez * dez;

    // Positive when e is inside for the orientation convention below, which is
    // the mirror of the classic "d below abc" convention.
    const double det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);

    const double aezp = std::abs(aez), bezp = std::abs(bez), cezp = std::abs(cez), dezp = std::abs(dez);
    const double aexbeyp = std::abs(aexbey), bexaeyp = std::abs(bexaey);
    const double bexceyp = std::abs(bexcey), cexbeyp = std::abs(cexbey);
    const double cexdeyp = std::abs(cexdey), dexceyp = std::abs(dexcey);
    const double dexaeyp = std::abs(dexaey), aexdeyp = std::abs(aexdey);
    const double aexceyp = std::abs(aexcey), cexaeyp = std::abs(cexaey);
    const double bexdeyp = std::abs(bexdey), dexbeyp = std::abs(dexbey);
    const double perm =
        ((cexdeyp + dexceyp) * bezp + (dexbeyp + bexdeyp) * cezp + (bexceyp + cexbeyp) * dezp) * alift +
        ((dexaeyp + aexdeyp) * cezp + (aexceyp + cexaeyp) * dezp + (cexdeyp + dexceyp) * aezp) * blift +
        ((aexbeyp + bexaeyp) * dezp + (bexdeyp + dexbeyp) * aezp + (dexaeyp + aexdeyp) * bezp) * clift +
        ((bexceyp + cexbeyp) * aezp + (cexaeyp + aexceyp) * bezp + (aexbeyp + bexaeyp) * cezp) * dlift;

    int s;
    if (std::abs(det) > kIspBound * perm) {
        s = sign_of(det);
    } else {
        const mpq_class ex = q(e.x()), ey = q(e.y()), ez = q(e.z());
        const mpq_class Ax = q(a.x()) - ex, Ay = q(a.y()) - ey, Az = q(a.z()) - ez;
        const mpq_class Bx = q(b.x()) - ex, By = q(b.y()) - ey, Bz = q(b.z()) - ez;
        const mpq_class Cx = q(c.x()) - ex, Cy = q(c.y()) - ey, Cz = q(c.z()) - ez;
        const mpq_class Dx = q(d.x()) - ex, Dy = q(d.y()) - ey, Dz = q(d.z()) - ez;
        const mpq_class AB = Ax * By - Bx * Ay, BC = Bx * Cy - Cx * By, CD = Cx * Dy - Dx * Cy;
        const mpq_class DA = Dx * Ay - Ax * Dy, AC = Ax * Cy - Cx * Ay, BD = Bx * Dy - Dx * By;
        const mpq_class ABC = Az * BC - Bz * AC + Cz * AB;
        const mpq_class BCD = Bz * CD - Cz * BD + Dz * BC;
        const mpq_class CDA = Cz * DA + Dz * AC + Az * CD;
        const mpq_class DAB = Dz * AB + Az * BD + Bz * DA;
        const mpq_class Al = Ax * Ax + Ay * Ay + Az * Az;
        const mpq_class Bl = Bx * Bx + By * By + Bz * Bz;
        const mpq_class Cl = Cx * Cx + Cy * Cy + Cz * Cz;
        const mpq_class Dl = Dx * Dx + Dy * Dy + Dz * Dz;
        s = sign_of(mpq_class((Dl * ABC - Cl * DAB) + (Bl * CDA - Al * BCD)));
    }
    // The classic determinant is positive for "inside" when orient is negative
    // in our convention; flip to match orient3d above.
    return -s;
}

} // namespace medial::predicates
